//! Plain-text weight files.
//!
//! ```text
//! fnn 64 9374
//! dense 128 64 relu
//! <64 lines of 128 weights>
//! <1 line of 64 biases>
//! dropout 0.1
//! ...
//! ```
//!
//! Values are written in shortest round-trip decimal form, so a save/load
//! cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::layer::{Activation, Layer};
use super::model::{expected_param_count, Architecture, NetworkModel};
use crate::error::{Error, Result};

fn join(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:?}").unwrap();
    }
    s
}

pub fn to_text(model: &NetworkModel) -> String {
    let mut out = format!(
        "{} {} {}\n",
        model.architecture.name(),
        model.packet_len,
        model.param_count()
    );
    for layer in &model.layers {
        match layer {
            Layer::Dense {
                inputs,
                outputs,
                activation,
                params,
            } => {
                writeln!(out, "dense {inputs} {outputs} {}", activation.name()).unwrap();
                let (w, b) = params.split_at(inputs * outputs);
                for row in w.chunks_exact(*inputs) {
                    writeln!(out, "{}", join(row)).unwrap();
                }
                writeln!(out, "{}", join(b)).unwrap();
            }
            Layer::Conv2d {
                height,
                width,
                in_channels,
                filters,
                kernel_width,
                activation,
                params,
            } => {
                writeln!(
                    out,
                    "conv2d {height} {width} {in_channels} {filters} {kernel_width} {}",
                    activation.name()
                )
                .unwrap();
                let (k, b) = params.split_at(filters * kernel_width * in_channels);
                for row in k.chunks_exact(kernel_width * in_channels) {
                    writeln!(out, "{}", join(row)).unwrap();
                }
                writeln!(out, "{}", join(b)).unwrap();
            }
            Layer::Dropout { rate } => writeln!(out, "dropout {rate:?}").unwrap(),
            Layer::Flatten => writeln!(out, "flatten").unwrap(),
        }
    }
    out
}

pub fn save(model: &NetworkModel, path: &Path) -> Result<()> {
    fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<NetworkModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text).map_err(|msg| Error::parse(path, msg))
}

pub fn from_text(text: &str) -> std::result::Result<NetworkModel, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| format!("unexpected end of file, expected {what}"))
    };
    let nums = |lineno: usize, line: &str, expect: usize| -> std::result::Result<Vec<f64>, String> {
        let v = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format!("line {lineno}: {e}"))?;
        if v.len() != expect {
            return Err(format!("line {lineno}: expected {expect} values, found {}", v.len()));
        }
        Ok(v)
    };
    let usize_at = |lineno: usize, tok: Option<&str>| -> std::result::Result<usize, String> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("line {lineno}: expected a dimension"))
    };
    let act_at = |lineno: usize, tok: Option<&str>| {
        tok.and_then(Activation::from_name)
            .ok_or_else(|| format!("line {lineno}: expected relu or softmax"))
    };

    let (ln, header) = next("header")?;
    let mut h = header.split_whitespace();
    let architecture = h
        .next()
        .and_then(Architecture::from_name)
        .ok_or_else(|| format!("line {ln}: unknown architecture"))?;
    let packet_len = usize_at(ln, h.next())?;
    let declared = usize_at(ln, h.next())?;

    let mut layers = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let mut t = line.split_whitespace();
        let layer = match t.next() {
            Some("dense") => {
                let inputs = usize_at(ln, t.next())?;
                let outputs = usize_at(ln, t.next())?;
                let activation = act_at(ln, t.next())?;
                let mut params = Vec::with_capacity(inputs * outputs + outputs);
                for _ in 0..outputs {
                    let (i, l) = lines.next().map(|(i, l)| (i + 1, l)).ok_or("truncated dense layer")?;
                    params.extend(nums(i, l, inputs)?);
                }
                let (i, l) = lines.next().map(|(i, l)| (i + 1, l)).ok_or("missing dense biases")?;
                params.extend(nums(i, l, outputs)?);
                Layer::Dense {
                    inputs,
                    outputs,
                    activation,
                    params,
                }
            }
            Some("conv2d") => {
                let height = usize_at(ln, t.next())?;
                let width = usize_at(ln, t.next())?;
                let in_channels = usize_at(ln, t.next())?;
                let filters = usize_at(ln, t.next())?;
                let kernel_width = usize_at(ln, t.next())?;
                let activation = act_at(ln, t.next())?;
                let mut params = Vec::new();
                for _ in 0..filters {
                    let (i, l) = lines.next().map(|(i, l)| (i + 1, l)).ok_or("truncated conv layer")?;
                    params.extend(nums(i, l, kernel_width * in_channels)?);
                }
                let (i, l) = lines.next().map(|(i, l)| (i + 1, l)).ok_or("missing conv biases")?;
                params.extend(nums(i, l, filters)?);
                Layer::Conv2d {
                    height,
                    width,
                    in_channels,
                    filters,
                    kernel_width,
                    activation,
                    params,
                }
            }
            Some("dropout") => {
                let rate = t
                    .next()
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| format!("line {ln}: expected dropout rate"))?;
                Layer::Dropout { rate }
            }
            Some("flatten") => Layer::Flatten,
            other => return Err(format!("line {ln}: unknown layer kind {other:?}")),
        };
        layers.push(layer);
    }

    let model = NetworkModel {
        architecture,
        packet_len,
        layers,
        trained: true,
    };
    let count = model.param_count();
    if count != declared {
        return Err(format!("header declares {declared} parameters, layers hold {count}"));
    }
    let expected = expected_param_count(architecture, packet_len);
    if count != expected {
        return Err(format!(
            "{} for {packet_len}-sample packets must have {expected} parameters, found {count}",
            architecture.name()
        ));
    }
    Ok(model)
}
