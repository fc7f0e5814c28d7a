//! JSON file schemas and value encoding for both numeric backends.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use divmarkov::scalar::parse_rational;
use divmarkov::{Alphabet, Channel, Distribution, DivergenceScalar, Ext, Rational};
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Number, Value};

/// A probability entry: a JSON number, or a string such as `"1/3"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(Number),
    Text(String),
}

/// A numeric backend the CLI can read and write.
pub trait Backend: DivergenceScalar {
    fn parse_entry(entry: &Entry) -> Result<Self>;
    fn encode(&self) -> Value;
}

impl Backend for f64 {
    fn parse_entry(entry: &Entry) -> Result<Self> {
        match entry {
            Entry::Number(n) => n.as_f64().context("number out of range"),
            Entry::Text(t) => match t.trim().parse::<f64>() {
                Ok(v) => Ok(v),
                Err(_) => parse_rational(t)
                    .and_then(|r| r.to_f64())
                    .with_context(|| format!("cannot parse probability {t:?}")),
            },
        }
    }

    fn encode(&self) -> Value {
        Number::from_f64(*self).map_or_else(|| Value::String(self.to_string()), Value::Number)
    }
}

impl Backend for Rational {
    /// Numbers are read through their shortest decimal form, so `0.1` is exactly `1/10`.
    fn parse_entry(entry: &Entry) -> Result<Self> {
        let text = match entry {
            Entry::Number(n) => n.to_string(),
            Entry::Text(t) => t.clone(),
        };
        parse_rational(&text).with_context(|| format!("cannot parse exact probability {text:?}"))
    }

    fn encode(&self) -> Value {
        Value::String(self.to_string())
    }
}

pub fn encode_ext<S: Backend>(value: &Ext<S>) -> Value {
    match value {
        Ext::Finite(v) => v.encode(),
        Ext::Infinite => Value::String("inf".into()),
    }
}

/// CSV cell for a JSON scalar.
pub fn csv_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    #[serde(default)]
    alphabet: Option<Vec<String>>,
    #[serde(default)]
    pair_of: Option<(Vec<String>, Vec<String>)>,
    probs: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    source: Vec<String>,
    #[serde(default)]
    target: Option<Vec<String>>,
    #[serde(default)]
    pair_of: Option<(Vec<String>, Vec<String>)>,
    matrix: Vec<Vec<Entry>>,
}

/// Either kind of input file.
pub enum Input<S> {
    Distribution(Distribution<S>),
    Channel(Channel<S>),
}

fn alphabet_from(
    labels: Option<Vec<String>>,
    pair_of: Option<(Vec<String>, Vec<String>)>,
    len: usize,
    what: &str,
) -> Result<Alphabet> {
    let alphabet = match (pair_of, labels) {
        (Some((x, y)), labels) => {
            let product = Alphabet::product(&Alphabet::new(x)?, &Alphabet::new(y)?);
            if let Some(labels) = labels {
                if labels.len() != product.len() {
                    bail!(
                        "{what} has {} labels but pair_of describes {}",
                        labels.len(),
                        product.len()
                    );
                }
            }
            product
        }
        (None, Some(labels)) => Alphabet::new(labels)?,
        (None, None) => Alphabet::indexed(len)?,
    };
    Ok(alphabet)
}

fn parse_distribution<S: Backend>(value: Value) -> Result<Distribution<S>> {
    let file: DistributionFile = serde_json::from_value(value).context("invalid distribution")?;
    let probs = file.probs.iter().map(S::parse_entry).collect::<Result<Vec<_>>>()?;
    let alphabet = alphabet_from(file.alphabet, file.pair_of, probs.len(), "distribution")?;
    Ok(Distribution::new(alphabet, probs)?)
}

fn parse_channel<S: Backend>(value: Value) -> Result<Channel<S>> {
    let file: ChannelFile = serde_json::from_value(value).context("invalid channel")?;
    let rows = file
        .matrix
        .iter()
        .map(|row| row.iter().map(S::parse_entry).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let target = alphabet_from(file.target, file.pair_of, rows.len(), "channel target")?;
    Ok(Channel::new(Alphabet::new(file.source)?, target, rows)?)
}

/// Parses a distribution, or a channel when the object has a `matrix` field.
pub fn parse_input<S: Backend>(text: &str) -> Result<Input<S>> {
    let value: Value = serde_json::from_str(text).context("malformed JSON")?;
    if value.get("matrix").is_some() {
        Ok(Input::Channel(parse_channel(value)?))
    } else {
        Ok(Input::Distribution(parse_distribution(value)?))
    }
}

pub fn read_input<S: Backend>(path: &Path) -> Result<Input<S>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_input(&text).with_context(|| format!("in {}", path.display()))
}

pub fn read_distribution<S: Backend>(path: &Path) -> Result<Distribution<S>> {
    match read_input(path)? {
        Input::Distribution(d) => Ok(d),
        Input::Channel(_) => bail!("{} holds a channel where a distribution is expected", path.display()),
    }
}

pub fn read_channel<S: Backend>(path: &Path) -> Result<Channel<S>> {
    match read_input(path)? {
        Input::Channel(c) => Ok(c),
        Input::Distribution(d) => Ok(d.as_channel()),
    }
}

fn pair_of(alphabet: &Alphabet) -> Option<Value> {
    alphabet.factors().map(|(x, y)| json!([x.labels(), y.labels()]))
}

pub fn distribution_json<S: Backend>(p: &Distribution<S>) -> Value {
    let mut v = json!({
        "alphabet": p.alphabet().labels(),
        "probs": p.probs().iter().map(Backend::encode).collect::<Vec<_>>(),
    });
    if let Some(pairs) = pair_of(p.alphabet()) {
        v["pair_of"] = pairs;
    }
    v
}

pub fn channel_json<S: Backend>(f: &Channel<S>) -> Value {
    let matrix: Vec<Vec<Value>> = f
        .rows()
        .iter()
        .map(|row| row.iter().map(Backend::encode).collect())
        .collect();
    let mut v = json!({
        "source": f.source().labels(),
        "target": f.target().labels(),
        "matrix": matrix,
    });
    if let Some(pairs) = pair_of(f.target()) {
        v["pair_of"] = pairs;
    }
    v
}

/// Pretty JSON with a trailing newline.
pub fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}
