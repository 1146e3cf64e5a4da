//! `key = value` run configuration. A `--config FILE` supplies defaults,
//! `--key value` flags override them, and every key is validated against
//! the command's key list before any work starts.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use jeo_core::metrics::fmt_sig;
use jeo_core::mri::MaskScheme;
use jeo_core::pipeline::{ProxChoice, Strategy};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Generate,
    Train,
    Reconstruct,
    Ablate,
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "generate" => Ok(Command::Generate),
            "train" => Ok(Command::Train),
            "reconstruct" => Ok(Command::Reconstruct),
            "ablate" => Ok(Command::Ablate),
            other => Err(CliError::Config(format!(
                "unknown command '{other}' (expected generate, train, reconstruct or ablate)"
            ))),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected 'key = value'", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Merged raw values of one invocation.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

/// Splits `argv[1..]` into the command and its merged key/value pairs.
pub fn parse_args(args: &[String]) -> Result<(Command, RawConfig), CliError> {
    let (cmd, rest) = args
        .split_first()
        .ok_or_else(|| CliError::Config("missing command; usage: jeo-mri {generate|train|reconstruct|ablate} [--config FILE] [--key value ...]".into()))?;
    let cmd: Command = cmd.parse()?;
    let mut file_values = Vec::new();
    let mut flag_values = Vec::new();
    let mut i = 0;
    while i < rest.len() {
        let arg = &rest[i];
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Config(format!("unexpected argument '{arg}'")))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                i += 1;
                let v = rest
                    .get(i)
                    .ok_or_else(|| CliError::Config(format!("flag --{key} needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        if key == "config" {
            let text = std::fs::read_to_string(&value)
                .map_err(|e| CliError::Io(format!("reading config {value}: {e}")))?;
            file_values.extend(parse_config_text(&text)?);
        } else {
            flag_values.push((key, value));
        }
        i += 1;
    }
    let mut values = BTreeMap::new();
    // flags win over file entries
    for (k, v) in file_values.into_iter().chain(flag_values) {
        values.insert(k, v);
    }
    Ok((cmd, RawConfig { values }))
}

impl RawConfig {
    pub fn from_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        Self {
            values: pairs.into_iter().collect(),
        }
    }

    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "unknown key(s) {}; allowed: {}",
                unknown.join(", "),
                allowed.join(", ")
            )))
        }
    }

    pub fn resolver(&self) -> Resolver<'_> {
        Resolver {
            raw: self,
            resolved: Vec::new(),
        }
    }
}

/// A typed configuration value with a canonical text form.
pub trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! int_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.parse().map_err(|_| format!("expected a non-negative integer, got '{s}'"))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
int_value!(usize, u64);

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v: f64 = s.parse().map_err(|_| format!("expected a number, got '{s}'"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("expected a finite number, got '{s}'"))
        }
    }
    fn render(&self) -> String {
        fmt_sig(*self)
    }
}

impl ConfigValue for String {
    fn parse_value(s: &str) -> Result<Self, String> {
        Ok(s.to_string())
    }
    fn render(&self) -> String {
        self.clone()
    }
}

impl ConfigValue for PathBuf {
    fn parse_value(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            Err("empty path".into())
        } else {
            Ok(PathBuf::from(s))
        }
    }
    fn render(&self) -> String {
        self.display().to_string()
    }
}

/// `HxW`, e.g. `64x64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape(pub usize, pub usize);

impl ConfigValue for Shape {
    fn parse_value(s: &str) -> Result<Self, String> {
        let (h, w) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected HxW, got '{s}'"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("expected HxW, got '{s}'"));
        Ok(Shape(parse(h)?, parse(w)?))
    }
    fn render(&self) -> String {
        format!("{}x{}", self.0, self.1)
    }
}

/// `on` / `off`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Switch(pub bool);

impl ConfigValue for Switch {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s {
            "on" | "true" | "yes" | "1" => Ok(Switch(true)),
            "off" | "false" | "no" | "0" => Ok(Switch(false)),
            _ => Err(format!("expected on/off, got '{s}'")),
        }
    }
    fn render(&self) -> String {
        if self.0 { "on" } else { "off" }.into()
    }
}

fn parse_via<T: FromStr<Err = jeo_core::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: jeo_core::Error| e.to_string())
}

impl ConfigValue for MaskScheme {
    fn parse_value(s: &str) -> Result<Self, String> {
        parse_via(s)
    }
    fn render(&self) -> String {
        self.name().into()
    }
}

impl ConfigValue for Strategy {
    fn parse_value(s: &str) -> Result<Self, String> {
        parse_via(s)
    }
    fn render(&self) -> String {
        self.name().into()
    }
}

impl ConfigValue for ProxChoice {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v: ProxChoice = parse_via(s)?;
        if let ProxChoice::Shrinkage(t) = v {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("shrinkage threshold must be > 0, got {t}"));
            }
        }
        Ok(v)
    }
    fn render(&self) -> String {
        match self {
            ProxChoice::Identity => "identity".into(),
            ProxChoice::TinyCnn => "tiny-cnn".into(),
            ProxChoice::Shrinkage(t) => format!("shrinkage:{}", fmt_sig(*t)),
        }
    }
}

impl<T: ConfigValue> ConfigValue for Vec<T> {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(T::parse_value)
            .collect()
    }
    fn render(&self) -> String {
        self.iter().map(ConfigValue::render).collect::<Vec<_>>().join(",")
    }
}

/// Resolves typed values and records the effective configuration.
pub struct Resolver<'a> {
    raw: &'a RawConfig,
    resolved: Vec<(String, String)>,
}

impl Resolver<'_> {
    fn record<T: ConfigValue>(&mut self, key: &str, v: &T) {
        self.resolved.push((key.to_string(), v.render()));
    }

    fn parse<T: ConfigValue>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw
            .values
            .get(key)
            .map(|s| T::parse_value(s).map_err(|e| CliError::Config(format!("{key}: {e}"))))
            .transpose()
    }

    pub fn get<T: ConfigValue>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        let v = self.parse(key)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn required<T: ConfigValue>(&mut self, key: &str) -> Result<T, CliError> {
        let v = self
            .parse(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))?;
        self.record(key, &v);
        Ok(v)
    }

    /// Parses a key without recording it, so values whose defaults depend
    /// on input files can still be validated up front.
    pub fn peek<T: ConfigValue>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.parse(key)
    }

    /// Like [`get`](Self::get) with a default computed only when absent.
    pub fn get_or_else<T: ConfigValue>(&mut self, key: &str, default: impl FnOnce() -> T) -> Result<T, CliError> {
        let v = match self.parse(key)? {
            Some(v) => v,
            None => default(),
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Rejects a value with a config error.
    pub fn check(&self, ok: bool, msg: impl Display) -> Result<(), CliError> {
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(msg.to_string()))
        }
    }

    /// The effective configuration as `key = value` lines, headed by the
    /// command and library version.
    pub fn render(&self, command: Command) -> String {
        let mut out = format!(
            "# jeo-mri {} (jeo-core {})\ncommand = {}\n",
            env!("CARGO_PKG_VERSION"),
            jeo_core::VERSION,
            format!("{command:?}").to_lowercase()
        );
        for (k, v) in &self.resolved {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn config_text_parsing() {
        let pairs = parse_config_text("# comment\nK = 5\n\nlr0=0.02  # trailing\n").unwrap();
        assert_eq!(pairs, vec![("K".into(), "5".into()), ("lr0".into(), "0.02".into())]);
        assert!(parse_config_text("novalue\n").is_err());
        assert!(parse_config_text(" = 3\n").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "K = 5\nepochs = 3\n").unwrap();
        let a = args(&format!("train --config {} --K 2 --seed=4", path.display()));
        let (cmd, raw) = parse_args(&a).unwrap();
        assert_eq!(cmd, Command::Train);
        let mut r = raw.resolver();
        assert_eq!(r.get("K", 7usize).unwrap(), 2);
        assert_eq!(r.get("epochs", 180usize).unwrap(), 3);
        assert_eq!(r.get("seed", 0u64).unwrap(), 4);
        assert!(r.render(cmd).contains("K = 2\nepochs = 3\nseed = 4\n"));
    }

    #[test]
    fn bad_input_is_a_config_error() {
        assert!(matches!(parse_args(&args("frobnicate")), Err(CliError::Config(_))));
        assert!(matches!(parse_args(&args("train --K")), Err(CliError::Config(_))));
        assert!(matches!(parse_args(&args("train K 3")), Err(CliError::Config(_))));
        let (_, raw) = parse_args(&args("train --bogus 1")).unwrap();
        assert!(matches!(raw.check_keys(&["K"]), Err(CliError::Config(_))));
        let (_, raw) = parse_args(&args("train --K five")).unwrap();
        assert!(matches!(raw.resolver().get("K", 7usize), Err(CliError::Config(_))));
        assert!(matches!(parse_args(&args("train --config /nonexistent/x.cfg")), Err(CliError::Io(_))));
    }

    #[test]
    fn typed_values_round_trip() {
        assert_eq!(Shape::parse_value("64x32").unwrap(), Shape(64, 32));
        assert!(Shape::parse_value("64").is_err());
        assert_eq!(Vec::<f64>::parse_value("2, 4,6").unwrap(), vec![2.0, 4.0, 6.0]);
        assert_eq!(vec![2.0, 4.5].render(), "2,4.5");
        assert_eq!(ProxChoice::parse_value("shrinkage:0.05").unwrap().render(), "shrinkage:0.05");
        assert!(ProxChoice::parse_value("shrinkage:-1").is_err());
        assert_eq!(Switch::parse_value("off").unwrap(), Switch(false));
        assert!(f64::parse_value("nan").is_err());
    }
}
