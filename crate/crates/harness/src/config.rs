//! Flat key/value configuration files: one `key = value` per line, `#`
//! comment lines, keys mirroring the hyperparameter and generator field
//! names. Sweep specifications add the sweep keys on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use slrm_core::Hyperparams;

use crate::error::{HarnessError, Result};
use crate::experiment::{Method, SweepSpec, SweepVar};
use crate::synth::{OmegaModel, SyntheticConfig};

/// Parsed key/value pairs with consumption tracking, so unknown keys can be
/// reported as usage errors.
pub struct KvMap {
    entries: BTreeMap<String, (String, usize)>,
    consumed: std::collections::BTreeSet<String>,
    path: PathBuf,
}

pub fn parse_kv_text(path: &Path, text: &str) -> Result<KvMap> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::data_at(path, line_no, "expected 'key = value'")
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if entries.insert(key.clone(), (value, line_no)).is_some() {
            return Err(HarnessError::data_at(
                path,
                line_no,
                format!("duplicate key '{key}'"),
            ));
        }
    }
    Ok(KvMap {
        entries,
        consumed: Default::default(),
        path: path.to_path_buf(),
    })
}

pub fn parse_kv_file(path: &Path) -> Result<KvMap> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_kv_text(path, &text)
}

impl KvMap {
    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        let found = self.entries.get(key).cloned();
        if found.is_some() {
            self.consumed.insert(key.to_string());
        }
        found
    }

    pub fn get_string(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| v)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                HarnessError::data_at(&self.path, line, format!("key '{key}' must be {what}"))
            }),
        }
    }

    pub fn get_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.parse(key, "a real number")
    }

    pub fn get_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.parse(key, "a nonnegative integer")
    }

    pub fn get_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.parse(key, "a nonnegative integer")
    }

    pub fn get_bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.parse(key, "true or false")
    }

    pub fn get_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        HarnessError::data_at(
                            &self.path,
                            line,
                            format!("key '{key}': cannot parse '{t}'"),
                        )
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Errors if any key was never consumed; catches typos in config files.
    pub fn finish(self) -> Result<()> {
        for (key, (_, line)) in &self.entries {
            if !self.consumed.contains(key) {
                return Err(HarnessError::data_at(
                    &self.path,
                    *line,
                    format!("unknown key '{key}'"),
                ));
            }
        }
        Ok(())
    }
}

/// Reads the trainer keys, falling back to defaults for absent ones.
pub fn hyperparams_from_kv(kv: &mut KvMap) -> Result<Hyperparams> {
    let mut hp = Hyperparams::default();
    if let Some(v) = kv.get_f64("lambda1")? {
        hp.lambda1 = v;
    }
    if let Some(v) = kv.get_f64("lambda2")? {
        hp.lambda2 = v;
    }
    if let Some(v) = kv.get_f64("lambda3")? {
        hp.lambda3 = v;
    }
    if let Some(v) = kv.get_f64("delta_rls")? {
        hp.delta_rls = v;
    }
    if let Some(v) = kv.get_f64("gamma")? {
        hp.gamma = v;
    }
    if let Some(v) = kv.get_f64("rho")? {
        hp.rho = v;
    }
    if let Some(v) = kv.get_usize("rho_constant_rounds")? {
        hp.rho_constant_rounds = v;
    }
    if let Some(v) = kv.get_usize("max_passes")? {
        hp.max_passes = v;
    }
    if let Some(v) = kv.get_usize("validation_period")? {
        hp.validation_period = Some(v);
    }
    if let Some(v) = kv.get_u64("seed")? {
        hp.seed = v;
    }
    hp.validate().map_err(HarnessError::from)?;
    Ok(hp)
}

/// Reads the generator keys (D, d, n are required).
pub fn synth_from_kv(kv: &mut KvMap) -> Result<SyntheticConfig> {
    let ambient_dim = kv
        .get_usize("D")?
        .ok_or_else(|| HarnessError::usage("missing required key 'D'"))?;
    let intrinsic_dim = kv
        .get_usize("d")?
        .ok_or_else(|| HarnessError::usage("missing required key 'd'"))?;
    let n_train = kv
        .get_usize("n")?
        .ok_or_else(|| HarnessError::usage("missing required key 'n'"))?;
    let omega_model = match kv.get_string("omega_model").as_deref() {
        None | Some("bernoulli") => OmegaModel::Bernoulli,
        Some("with_replacement") => {
            let m = kv.get_usize("m")?.ok_or_else(|| {
                HarnessError::usage("omega_model = with_replacement requires key 'm'")
            })?;
            OmegaModel::WithReplacement { m }
        }
        Some(other) => {
            return Err(HarnessError::usage(format!(
                "unknown omega_model '{other}'"
            )))
        }
    };
    let cfg = SyntheticConfig {
        ambient_dim,
        intrinsic_dim,
        n_train,
        n_val: kv.get_usize("n_val")?.unwrap_or(500),
        n_test: kv.get_usize("n_test")?.unwrap_or(1000),
        sparsity: kv.get_usize("sparsity")?.unwrap_or(intrinsic_dim.min(10)),
        sigma_x: kv.get_f64("sigma_x")?.unwrap_or(0.0),
        sigma_y: kv.get_f64("sigma_y")?.unwrap_or(0.0),
        p_train: kv.get_f64("p")?.unwrap_or(1.0),
        q_eval: kv.get_f64("q")?.unwrap_or(1.0),
        seed: kv.get_u64("seed")?.unwrap_or(0),
        omega_model,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a sweep specification: generator and trainer keys plus
/// `sweep`, `values`, `methods`, `seeds`, `out` and optional knobs.
pub fn sweep_spec_from_file(path: &Path) -> Result<SweepSpec> {
    let mut kv = parse_kv_file(path)?;
    // `seed` feeds both the generator and the trainer defaults; read the
    // trainer first so the key is consumed once and reused below.
    let hyperparams = hyperparams_from_kv(&mut kv)?;
    let mut synth = synth_from_kv(&mut kv)?;
    synth.seed = hyperparams.seed;

    let sweep_var: SweepVar = kv
        .get_string("sweep")
        .ok_or_else(|| HarnessError::usage("missing required key 'sweep'"))?
        .parse()?;
    let values = kv
        .get_f64_list("values")?
        .ok_or_else(|| HarnessError::usage("missing required key 'values'"))?;
    if values.is_empty() {
        return Err(HarnessError::usage("'values' must be nonempty"));
    }
    let methods: Vec<Method> = match kv.get_string("methods") {
        None => vec![Method::Slrm, Method::Smpcr],
        Some(spec) => {
            let parsed: Result<Vec<Method>> = spec
                .split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| t.parse())
                .collect();
            parsed?
        }
    };
    if methods.is_empty() {
        return Err(HarnessError::usage("'methods' must be nonempty"));
    }
    let replicates = kv.get_usize("seeds")?.unwrap_or(5);
    if replicates == 0 {
        return Err(HarnessError::usage("'seeds' must be positive"));
    }
    let out: PathBuf = kv
        .get_string("out")
        .ok_or_else(|| HarnessError::usage("missing required key 'out'"))?
        .into();
    let long_out: PathBuf = match kv.get_string("long_out") {
        Some(p) => p.into(),
        None => default_long_path(&out),
    };
    let model_d = kv.get_usize("model_d")?;
    let validation_gating = kv.get_bool("validation_gating")?.unwrap_or(true);
    kv.finish()?;
    Ok(SweepSpec {
        synth,
        hyperparams,
        model_d,
        sweep_var,
        values,
        methods,
        replicates,
        validation_gating,
        out,
        long_out,
    })
}

/// `results.csv` -> `results_long.csv`.
pub fn default_long_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".to_string());
    let ext = out
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    out.with_file_name(format!("{stem}_long.{ext}"))
}
