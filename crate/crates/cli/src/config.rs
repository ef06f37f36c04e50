//! Flat INI-style configuration: sections of key = value lines, comments
//! with `#` or `;`. Command-line flags override file values.

use std::collections::HashMap;
use std::path::Path;

use einbc::boundary::{BoundaryConditionSpec, GeneralCoefficients};
use einbc::geometry::{GeometrySpec, WarpProfile};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parsed key/value sections of an INI file.
#[derive(Debug, Default, Clone)]
pub struct IniFile {
    sections: HashMap<String, HashMap<String, String>>,
}

impl IniFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: HashMap<String, HashMap<String, String>> = HashMap::new();
        let mut current = String::from("");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                current = line[1..line.len() - 1].trim().to_lowercase();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got `{line}`", lineno + 1));
            };
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_lowercase(), value.trim().to_string());
        }
        Ok(IniFile { sections })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("[{section}] {key}: `{v}` is not a number"))),
        }
    }

    fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError(format!("[{section}] {key}: `{v}` is not an integer"))),
        }
    }
}

/// Parses a comma-separated list of exactly N floats.
pub fn parse_floats<const N: usize>(text: &str) -> Result<[f64; N], ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return err(format!("expected {N} comma-separated values, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.parse::<f64>().map_err(|_| ConfigError(format!("`{p}` is not a number")))?;
    }
    Ok(out)
}

/// The S matrix argument: `zero` or six comma-separated entries in the
/// order (11, 22, 33, 12, 13, 23).
pub fn parse_s_matrix(text: &str) -> Result<[f64; 6], ConfigError> {
    if text.eq_ignore_ascii_case("zero") {
        Ok([0.0; 6])
    } else {
        parse_floats::<6>(text)
    }
}

/// Resolved run configuration with documented bounds enforced.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub boundary: BoundaryConditionSpec,
    pub grid_points: usize,
    pub mode_cutoff: i32,
    pub tolerance: f64,
    pub seed: u64,
    pub jobs: usize,
    pub out_dir: std::path::PathBuf,
    pub write_csv: bool,
    pub write_json: bool,
    pub plot: bool,
}

pub const MAX_GRID: usize = 2000;
pub const MAX_MODES: i32 = 8;
const TAU: f64 = 2.0 * std::f64::consts::PI;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: GeometrySpec::flat_torus_product(1.0, [TAU; 3]).expect("valid default"),
            boundary: BoundaryConditionSpec::Anderson,
            grid_points: 201,
            mode_cutoff: 1,
            tolerance: 1e-8,
            seed: 0,
            jobs: 1,
            out_dir: std::path::PathBuf::from("out"),
            write_csv: true,
            write_json: true,
            plot: false,
        }
    }
}

impl RunConfig {
    /// Builds the configuration from an optional INI file; flags are
    /// applied by the subcommands on top.
    pub fn from_ini(ini: &IniFile) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();

        // [geometry]
        let t = ini.get_f64("geometry", "t")?.unwrap_or(1.0);
        let l1 = ini.get_f64("geometry", "l1")?.unwrap_or(TAU);
        let l2 = ini.get_f64("geometry", "l2")?.unwrap_or(TAU);
        let l3 = ini.get_f64("geometry", "l3")?.unwrap_or(TAU);
        let warp_name = ini.get("geometry", "warp").unwrap_or("flat");
        let kind = ini.get("geometry", "kind").unwrap_or("flat_torus_product");
        cfg.geometry = match kind {
            "flat_torus_product" => {
                if warp_name != "flat" {
                    return err("flat_torus_product requires warp = flat");
                }
                GeometrySpec::flat_torus_product(t, [l1, l2, l3]).map_err(|e| ConfigError(e.to_string()))?
            }
            "warped_torus_product" => {
                let warp = WarpProfile::preset(warp_name).map_err(|e| ConfigError(e.to_string()))?;
                GeometrySpec::warped_torus_product(t, [l1, l2, l3], warp)
                    .map_err(|e| ConfigError(e.to_string()))?
            }
            other => return err(format!("unknown geometry kind `{other}`")),
        };

        // [boundary]
        if let Some(kind) = ini.get("boundary", "kind") {
            cfg.boundary = boundary_from_ini(ini, kind)?;
        }

        // [numerics]
        if let Some(m) = ini.get_usize("numerics", "grid")? {
            cfg.grid_points = m;
        }
        if let Some(n) = ini.get_usize("numerics", "modes")? {
            cfg.mode_cutoff = n as i32;
        }
        if let Some(tol) = ini.get_f64("numerics", "tol")? {
            cfg.tolerance = tol;
        }
        if let Some(seed) = ini.get_usize("numerics", "seed")? {
            cfg.seed = seed as u64;
        }
        if let Some(jobs) = ini.get_usize("numerics", "jobs")? {
            cfg.jobs = jobs;
        }

        // [output]
        if let Some(dir) = ini.get("output", "dir") {
            cfg.out_dir = dir.into();
        }
        if let Some(formats) = ini.get("output", "formats") {
            cfg.write_csv = formats.contains("csv");
            cfg.write_json = formats.contains("json");
        }
        if let Some(plot) = ini.get("output", "plot") {
            cfg.plot = matches!(plot, "true" | "yes" | "1");
        }

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_points > MAX_GRID {
            return err(format!("grid = {} exceeds the bound {MAX_GRID}", self.grid_points));
        }
        if self.mode_cutoff > MAX_MODES || self.mode_cutoff < 0 {
            return err(format!("modes = {} outside [0, {MAX_MODES}]", self.mode_cutoff));
        }
        if !(self.tolerance > 0.0) {
            return err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.jobs == 0 {
            return err("jobs must be at least 1");
        }
        Ok(())
    }
}

/// Reads a boundary spec from an INI section. Per-side keys (`c1_lower`,
/// `c1_upper`, ...) override the shared ones.
pub fn boundary_from_ini(ini: &IniFile, kind: &str) -> Result<BoundaryConditionSpec, ConfigError> {
    match kind {
        "dirichlet" => Ok(BoundaryConditionSpec::Dirichlet),
        "anderson" => Ok(BoundaryConditionSpec::Anderson),
        "general" => {
            let shared = side_coefficients(ini, "")?;
            let lower = side_coefficients_or(ini, "_lower", shared)?;
            let upper = side_coefficients_or(ini, "_upper", shared)?;
            Ok(BoundaryConditionSpec::GeneralConformal { lower, upper })
        }
        other => err(format!("unknown boundary kind `{other}`")),
    }
}

fn side_coefficients(ini: &IniFile, suffix: &str) -> Result<GeneralCoefficients, ConfigError> {
    side_coefficients_or(ini, suffix, GeneralCoefficients::new(0.0, 0.0, [0.0; 3], [0.0; 6]))
}

fn side_coefficients_or(
    ini: &IniFile,
    suffix: &str,
    base: GeneralCoefficients,
) -> Result<GeneralCoefficients, ConfigError> {
    let mut c = base;
    if let Some(v) = ini.get("boundary", &format!("c1{suffix}")) {
        c.c1 = v.parse().map_err(|_| ConfigError(format!("c1{suffix}: `{v}` is not a number")))?;
    }
    if let Some(v) = ini.get("boundary", &format!("c2{suffix}")) {
        c.c2 = v.parse().map_err(|_| ConfigError(format!("c2{suffix}: `{v}` is not a number")))?;
    }
    if let Some(v) = ini.get("boundary", &format!("v{suffix}")) {
        c.v = parse_floats::<3>(v)?;
    }
    if let Some(v) = ini.get("boundary", &format!("s_matrix{suffix}")) {
        c.s_matrix = parse_s_matrix(v)?;
    }
    Ok(c)
}

/// Parses a `--bc` argument: `dirichlet`, `anderson` or `general:<file>`.
pub fn boundary_from_flag(flag: &str) -> Result<BoundaryConditionSpec, ConfigError> {
    match flag {
        "dirichlet" => Ok(BoundaryConditionSpec::Dirichlet),
        "anderson" => Ok(BoundaryConditionSpec::Anderson),
        other => {
            if let Some(path) = other.strip_prefix("general:") {
                let ini = IniFile::load(Path::new(path))?;
                boundary_from_ini(&ini, "general")
            } else {
                err(format!("unknown boundary condition `{other}` (expected dirichlet, anderson or general:<file>)"))
            }
        }
    }
}
