#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub dir: PathBuf,
    pub stderr: String,
    _tmp: tempfile::TempDir,
}

impl Run {
    pub fn report_text(&self) -> String {
        fs::read_to_string(self.dir.join("report.json")).expect("report.json")
    }

    pub fn report(&self) -> Value {
        serde_json::from_str(&self.report_text()).expect("valid report json")
    }

    pub fn file(&self, name: &str) -> String {
        fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    /// Rows of a CSV table as parsed floats, skipping the header.
    pub fn csv_floats(&self, name: &str) -> Vec<Vec<f64>> {
        let text = self.file(name);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        r.records()
            .map(|rec| rec.unwrap().iter().map(|c| c.parse().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn assertion(&self, name: &str) -> Value {
        self.report()["assertions"]
            .as_array()
            .unwrap()
            .iter()
            .find(|a| a["name"] == name)
            .unwrap_or_else(|| panic!("no assertion {name}"))
            .clone()
    }
}

/// Runs the binary in a fresh output directory; `args[0]` is the subcommand.
pub fn ivp(args: &[&str]) -> Run {
    ivp_in(args, None)
}

pub fn ivp_in(args: &[&str], cwd: Option<&Path>) -> Run {
    let tmp = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ivp"));
    cmd.arg("--out").arg(tmp.path()).args(args).env_remove("IVP_OUT_DIR");
    if let Some(d) = cwd {
        cmd.current_dir(d);
    }
    let out = cmd.output().expect("binary runs");
    let dir = tmp.path().join(args.first().copied().unwrap_or(""));
    Run {
        code: out.status.code().unwrap_or(-1),
        dir,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        _tmp: tmp,
    }
}
