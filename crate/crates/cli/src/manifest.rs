use std::path::Path;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Incomplete,
    Complete,
}

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: String,
    pub preset: String,
    pub seed: u64,
    pub zero_mode: String,
    pub chirp_convention: String,
    pub status: Status,
    pub halt: Option<String>,
    pub artifacts: Vec<String>,
    pub entries: Vec<(String, String)>,
    pub note: Option<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            preset: config.preset.to_string(),
            seed: config.seed,
            zero_mode: config.params.zero_mode().as_str().to_string(),
            chirp_convention: config.chirp_convention.as_str().to_string(),
            status: Status::Incomplete,
            halt: None,
            artifacts: Vec::new(),
            entries: config.entries.clone(),
            note: None,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &str| out.push_str(&format!("{k} = {v}\n"));
        kv("version", ghartree_core::VERSION);
        kv("command", &self.command);
        kv("preset", &self.preset);
        kv("seed", &self.seed.to_string());
        kv("zero_mode", &self.zero_mode);
        kv("chirp_convention", &self.chirp_convention);
        kv(
            "status",
            match self.status {
                Status::Complete => "complete",
                Status::Incomplete => "incomplete",
            },
        );
        kv("halt", self.halt.as_deref().unwrap_or("none"));
        if let Some(note) = &self.note {
            kv("note", note);
        }
        kv("artifacts", &self.artifacts.join(", "));
        for (k, v) in &self.entries {
            kv(&format!("config.{k}"), v);
        }
        out
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join("MANIFEST"), self.render())
    }
}
