//! JSON file formats: net specifications and solution outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{ForbiddenZone, Net, Repeater, RepeaterSolution, Segment, TechParams};
use crate::rip::StageTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechFile {
    pub r_s_ohm: f64,
    pub c_o_f_per_u: f64,
    pub c_p_f_per_u: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub length_um: f64,
    pub r_ohm_per_um: f64,
    pub c_f_per_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneFile {
    pub start_um: f64,
    pub end_um: f64,
}

/// On-disk net specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetFile {
    pub tech: TechFile,
    pub segments: Vec<SegmentFile>,
    #[serde(default)]
    pub forbidden: Vec<ZoneFile>,
    pub driver_width_u: f64,
    pub receiver_width_u: f64,
}

impl From<&TechParams<f64>> for TechFile {
    fn from(t: &TechParams<f64>) -> Self {
        Self {
            r_s_ohm: t.r_s,
            c_o_f_per_u: t.c_o,
            c_p_f_per_u: t.c_p,
            u: t.u,
        }
    }
}

impl TechFile {
    pub fn to_tech(&self) -> Result<TechParams<f64>> {
        TechParams::new(self.r_s_ohm, self.c_o_f_per_u, self.c_p_f_per_u, self.u)
    }
}

impl NetFile {
    pub fn from_parts(tech: &TechParams<f64>, net: &Net<f64>) -> Self {
        Self {
            tech: tech.into(),
            segments: net
                .segments()
                .iter()
                .map(|s| SegmentFile {
                    length_um: s.length,
                    r_ohm_per_um: s.r,
                    c_f_per_um: s.c,
                })
                .collect(),
            forbidden: net
                .zones()
                .iter()
                .map(|z| ZoneFile {
                    start_um: z.start,
                    end_um: z.end,
                })
                .collect(),
            driver_width_u: net.driver_width(),
            receiver_width_u: net.receiver_width(),
        }
    }

    /// Validate and convert into the in-memory types.
    pub fn to_parts(&self) -> Result<(TechParams<f64>, Net<f64>)> {
        let tech = self.tech.to_tech()?;
        let net = Net::new(
            self.segments
                .iter()
                .map(|s| Segment::new(s.length_um, s.r_ohm_per_um, s.c_f_per_um))
                .collect(),
            self.forbidden
                .iter()
                .map(|z| ForbiddenZone::new(z.start_um, z.end_um))
                .collect(),
            self.driver_width_u,
            self.receiver_width_u,
        )?;
        Ok((tech, net))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("net file serializes") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let s = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        Self::from_json(&s)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeaterFile {
    pub x_um: f64,
    pub width_u: f64,
}

/// On-disk solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub repeaters: Vec<RepeaterFile>,
    pub delay_s: Option<f64>,
    pub total_width_u: Option<f64>,
    pub feasible: bool,
    pub stage_trace: Vec<StageTrace>,
    pub runtime_s: f64,
}

impl SolutionFile {
    pub fn feasible(sol: &RepeaterSolution<f64>, stage_trace: Vec<StageTrace>, runtime_s: f64) -> Self {
        Self {
            repeaters: sol
                .repeaters
                .iter()
                .map(|r| RepeaterFile {
                    x_um: r.x,
                    width_u: r.w,
                })
                .collect(),
            delay_s: Some(sol.delay),
            total_width_u: Some(sol.total_width),
            feasible: true,
            stage_trace,
            runtime_s,
        }
    }

    pub fn infeasible(stage_trace: Vec<StageTrace>, runtime_s: f64) -> Self {
        Self {
            repeaters: vec![],
            delay_s: None,
            total_width_u: None,
            feasible: false,
            stage_trace,
            runtime_s,
        }
    }

    pub fn repeaters(&self) -> Vec<Repeater<f64>> {
        self.repeaters.iter().map(|r| Repeater::new(r.x_um, r.width_u)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Per-unit-length RC of one routing layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub r_ohm_per_um: f64,
    pub c_f_per_um: f64,
}

/// Device constants plus the two routing layers used by the net generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechConfig {
    pub tech: TechFile,
    pub metal4: LayerFile,
    pub metal5: LayerFile,
}

/// Shipped default technology: representative 0.18 µm-class values with the
/// width unit `u` taken as a third of a 7 kΩ / 2 fF minimum device.
pub const DEFAULT_TECH_JSON: &str = include_str!("../data/default_tech.json");

impl TechConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.tech.to_tech()?;
        for (name, l) in [("metal4", cfg.metal4), ("metal5", cfg.metal5)] {
            if !(l.r_ohm_per_um > 0.0 && l.c_f_per_um > 0.0) {
                return Err(Error::InvalidTech(format!("{name} RC must be > 0")));
            }
        }
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let s = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        Self::from_json(&s)
    }
}

impl Default for TechConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_TECH_JSON).expect("bundled tech config parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_names() {
        let text = r#"{
            "tech": {"r_s_ohm": 7000.0, "c_o_f_per_u": 2e-15, "c_p_f_per_u": 1.5e-15, "u": 1.0},
            "segments": [{"length_um": 1000.0, "r_ohm_per_um": 0.075, "c_f_per_um": 2e-16}],
            "forbidden": [{"start_um": 200.0, "end_um": 400.0}],
            "driver_width_u": 20.0,
            "receiver_width_u": 10.0
        }"#;
        let f = NetFile::from_json(text).unwrap();
        let (tech, net) = f.to_parts().unwrap();
        assert_eq!(tech.r_s, 7000.0);
        assert_eq!(net.total_length(), 1000.0);
        assert!(net.in_forbidden(300.0));
        let back = NetFile::from_json(&NetFile::from_parts(&tech, &net).to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_invalid_nets_and_unknown_fields() {
        let bad_zone = r#"{"tech": {"r_s_ohm": 1.0, "c_o_f_per_u": 1.0, "c_p_f_per_u": 0.0, "u": 1.0},
            "segments": [{"length_um": 10.0, "r_ohm_per_um": 1.0, "c_f_per_um": 1.0}],
            "forbidden": [{"start_um": 5.0, "end_um": 4.0}],
            "driver_width_u": 1.0, "receiver_width_u": 1.0}"#;
        assert!(NetFile::from_json(bad_zone).unwrap().to_parts().is_err());
        let extra = bad_zone.replace("\"u\": 1.0", "\"u\": 1.0, \"vdd\": 1.8");
        assert!(NetFile::from_json(&extra).is_err());
    }

    #[test]
    fn default_tech_is_valid() {
        let cfg = TechConfig::default();
        assert!(cfg.tech.to_tech().is_ok());
        assert!(cfg.metal4.r_ohm_per_um > 0.0);
    }
}
