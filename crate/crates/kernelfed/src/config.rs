//! Config-file handling for the experiment harness.
//!
//! Sweeps are configured by a small TOML file with one section per
//! algorithm plus `[task]` and `[sweep]` sections; every key has a
//! sensible default and every key can also be set from the command line,
//! with the command line winning on conflict.

use serde::Deserialize;

use crate::bench::{AlgorithmKind, SweepConfig};
use crate::datagen::{TaskSpec, TaskVariant};
use crate::error::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default, rename = "dcl-kr")]
    pub dcl_kr: DclSection,
    #[serde(default, rename = "central-krr")]
    pub central_krr: RidgeSection,
    #[serde(default, rename = "central-krgd")]
    pub central_krgd: GdSection,
    #[serde(default, rename = "dc-ny")]
    pub dc_ny: RidgeSection,
    #[serde(default, rename = "dkrr-ny-cm")]
    pub dkrr_ny_cm: DkrrSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub variant: Option<String>,
    pub noise_sd: Option<f64>,
    pub truncation: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub algorithms: Option<Vec<String>>,
    pub m_values: Option<Vec<usize>>,
    pub repetitions: Option<usize>,
    pub base_seed: Option<u64>,
    pub test_size: Option<usize>,
    pub beta: Option<f64>,
    pub alpha_n0: Option<f64>,
    pub n_per_party: Option<usize>,
    pub timing: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DclSection {
    pub d: Option<f64>,
    pub eta: Option<f64>,
    pub e: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeSection {
    pub c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdSection {
    pub d: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DkrrSection {
    pub c: Option<f64>,
    pub eta: Option<f64>,
    pub rounds: Option<u32>,
}

pub fn parse_task_variant(s: &str) -> Result<TaskVariant> {
    match s {
        "toy1d" => Ok(TaskVariant::Toy1d),
        "toy3d" => Ok(TaskVariant::Toy3d),
        other => Err(Error::Config(format!(
            "unknown task {other:?}; expected toy1d or toy3d"
        ))),
    }
}

pub fn parse_algorithms(names: &[String]) -> Result<Vec<AlgorithmKind>> {
    names.iter().map(|s| AlgorithmKind::parse(s)).collect()
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config file: {e}")))
    }

    /// The task variant requested by the file, if any.
    pub fn variant(&self) -> Result<Option<TaskVariant>> {
        self.task
            .variant
            .as_deref()
            .map(parse_task_variant)
            .transpose()
    }

    /// Layer the file's settings on top of a default config for `variant`.
    pub fn resolve(&self, variant: TaskVariant) -> Result<SweepConfig> {
        let mut task = match variant {
            TaskVariant::Toy1d => TaskSpec::toy1d(),
            TaskVariant::Toy3d => TaskSpec::toy3d(),
        };
        if let Some(sd) = self.task.noise_sd {
            if sd < 0.0 {
                return Err(Error::Config(format!("noise_sd must be nonnegative, got {sd}")));
            }
            task.noise_sd = sd;
        }
        if let Some(tr) = self.task.truncation {
            if tr == 0 {
                return Err(Error::Config("truncation must be positive".into()));
            }
            task.truncation = tr;
        }
        let mut cfg = SweepConfig::new(task);
        let s = &self.sweep;
        if let Some(a) = &s.algorithms {
            cfg.algorithms = parse_algorithms(a)?;
        }
        if let Some(v) = &s.m_values {
            cfg.m_values = v.clone();
        }
        if let Some(v) = s.repetitions {
            cfg.repetitions = v;
        }
        if let Some(v) = s.base_seed {
            cfg.base_seed = v;
        }
        if let Some(v) = s.test_size {
            cfg.test_size = v;
        }
        if let Some(v) = s.beta {
            cfg.beta = v;
        }
        if let Some(v) = s.alpha_n0 {
            cfg.alpha_n0 = v;
        }
        if let Some(v) = s.n_per_party {
            cfg.n_per_party = v;
        }
        if let Some(v) = s.timing {
            cfg.timing = v;
        }
        let h = &mut cfg.hyper;
        if let Some(v) = self.dcl_kr.d {
            h.dcl_d = v;
        }
        if let Some(v) = self.dcl_kr.eta {
            h.dcl_eta = v;
        }
        if let Some(v) = self.dcl_kr.e {
            h.dcl_local_steps = v;
        }
        if let Some(v) = self.central_krr.c {
            h.krr_c = v;
        }
        if let Some(v) = self.central_krgd.d {
            h.krgd_d = v;
        }
        if let Some(v) = self.central_krgd.eta {
            h.krgd_eta = v;
        }
        if let Some(v) = self.dc_ny.c {
            h.dcny_c = v;
        }
        if let Some(v) = self.dkrr_ny_cm.c {
            h.dkrr_c = v;
        }
        if let Some(v) = self.dkrr_ny_cm.eta {
            h.dkrr_eta = v;
        }
        if let Some(v) = self.dkrr_ny_cm.rounds {
            h.dkrr_rounds = v;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = r#"
[task]
variant = "toy3d"
noise_sd = 0.3

[sweep]
algorithms = ["dcl-kr", "dc-ny"]
m_values = [5, 10]
repetitions = 3
base_seed = 99
beta = 0.5
alpha_n0 = 4.0

[dcl-kr]
d = 10.0
e = 4

[dc-ny]
c = 0.004
"#;
        let file = FileConfig::parse(text).unwrap();
        let variant = file.variant().unwrap().unwrap();
        let cfg = file.resolve(variant).unwrap();
        assert_eq!(cfg.task.variant, TaskVariant::Toy3d);
        assert_eq!(cfg.task.noise_sd, 0.3);
        assert_eq!(cfg.m_values, vec![5, 10]);
        assert_eq!(cfg.repetitions, 3);
        assert_eq!(cfg.base_seed, 99);
        assert_eq!(cfg.beta, 0.5);
        assert_eq!(cfg.alpha_n0, 4.0);
        assert_eq!(cfg.hyper.dcl_d, 10.0);
        assert_eq!(cfg.hyper.dcl_local_steps, 4);
        assert_eq!(cfg.hyper.dcny_c, 0.004);
        // untouched keys keep the toy3d defaults
        assert_eq!(cfg.hyper.krgd_d, 50.0);
        assert_eq!(
            cfg.algorithms,
            vec![AlgorithmKind::DclKr, AlgorithmKind::DcNy]
        );
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(
            FileConfig::parse("[sweep]\nbogus = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            FileConfig::parse("[task]\nvariant = \"toy9d\"\n")
                .unwrap()
                .variant(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn defaults_match_task_table() {
        let cfg = FileConfig::default().resolve(TaskVariant::Toy1d).unwrap();
        assert_eq!(cfg.hyper.krr_c, 0.055);
        assert_eq!(cfg.hyper.krgd_d, 15.0);
        assert_eq!(cfg.hyper.dcny_c, 0.006);
        assert_eq!(cfg.hyper.dkrr_c, 0.008);
        assert_eq!(cfg.hyper.dcl_d, 2.5);
        assert_eq!(cfg.hyper.dcl_local_steps, 5);
        assert_eq!(cfg.hyper.dcl_eta, 0.5);
        let cfg = FileConfig::default().resolve(TaskVariant::Toy3d).unwrap();
        assert_eq!(cfg.hyper.krr_c, 0.016);
        assert_eq!(cfg.hyper.krgd_d, 50.0);
        assert_eq!(cfg.hyper.dcny_c, 0.002);
        assert_eq!(cfg.hyper.dkrr_c, 0.005);
        assert_eq!(cfg.hyper.dcl_d, 12.5);
    }
}
