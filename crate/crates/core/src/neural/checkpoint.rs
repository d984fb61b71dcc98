use std::fmt::Write as _;
use std::path::Path;

use super::{Activation, Mlp};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &str = "highway-qnet";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Text form: a header with dims, activation and step, then per layer a
/// `weights` block (one row per line) and a `bias` line. Values use the
/// shortest representation that parses back to the same bits.
pub fn to_text<T: Scalar>(net: &Mlp<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION}");
    let dims: Vec<String> = net.dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "dims {}", dims.join(" "));
    let _ = writeln!(s, "activation {}", net.hidden_activation().name());
    let _ = writeln!(s, "step {}", net.step);
    let p = net.params();
    for (l, shape) in net.layers().iter().enumerate() {
        let _ = writeln!(s, "layer {l} weights {} {}", shape.n_out, shape.n_in);
        for o in 0..shape.n_out {
            let row = &p[shape.weights + o * shape.n_in..shape.weights + (o + 1) * shape.n_in];
            push_values(&mut s, row);
        }
        let _ = writeln!(s, "layer {l} bias {}", shape.n_out);
        push_values(&mut s, &p[shape.bias..shape.bias + shape.n_out]);
    }
    s.push_str("end\n");
    s
}

fn push_values<T: Scalar>(s: &mut String, values: &[T]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s.push('\n');
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if !line.is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(Error::Checkpoint(format!("unexpected end of file, expected {what}")))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next(key)?;
        match line.strip_prefix(key) {
            Some(rest) if rest.starts_with(' ') => Ok((n, rest.trim())),
            _ => Err(Error::Checkpoint(format!("line {n}: expected `{key} ...`, found `{line}`"))),
        }
    }
}

fn parse_values<T: Scalar>(n: usize, line: &str, expected: usize) -> Result<Vec<T>> {
    let values = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Checkpoint(format!("line {n}: invalid value `{tok}`")))
        })
        .collect::<Result<Vec<T>>>()?;
    if values.len() != expected {
        return Err(Error::Checkpoint(format!(
            "line {n}: expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn from_text<T: Scalar>(text: &str) -> Result<Mlp<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (n, header) = lines.next("header")?;
    let expected_header = format!("{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION}");
    if header != expected_header {
        return Err(Error::Checkpoint(format!(
            "line {n}: unsupported header `{header}`, expected `{expected_header}`"
        )));
    }
    let (n, dims) = lines.keyed("dims")?;
    let dims = dims
        .split_whitespace()
        .map(|d| d.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Checkpoint(format!("line {n}: bad dims: {e}")))?;
    let (n, act) = lines.keyed("activation")?;
    let hidden = Activation::parse(act).ok_or_else(|| Error::Checkpoint(format!("line {n}: unknown activation `{act}`")))?;
    let (n, step) = lines.keyed("step")?;
    let step = step
        .parse::<u64>()
        .map_err(|e| Error::Checkpoint(format!("line {n}: bad step: {e}")))?;
    let mut net = Mlp::<T>::zeros(&dims, hidden).map_err(|e| Error::Checkpoint(e.to_string()))?;
    net.step = step;
    for (l, shape) in net.layers().to_vec().into_iter().enumerate() {
        let (n, head) = lines.keyed("layer")?;
        let want = format!("{l} weights {} {}", shape.n_out, shape.n_in);
        if head != want {
            return Err(Error::Checkpoint(format!("line {n}: expected `layer {want}`, found `layer {head}`")));
        }
        for o in 0..shape.n_out {
            let (n, row) = lines.next("weight row")?;
            let values = parse_values::<T>(n, row, shape.n_in)?;
            let start = shape.weights + o * shape.n_in;
            net.params_mut()[start..start + shape.n_in].copy_from_slice(&values);
        }
        let (n, head) = lines.keyed("layer")?;
        let want = format!("{l} bias {}", shape.n_out);
        if head != want {
            return Err(Error::Checkpoint(format!("line {n}: expected `layer {want}`, found `layer {head}`")));
        }
        let (n, row) = lines.next("bias row")?;
        let values = parse_values::<T>(n, row, shape.n_out)?;
        net.params_mut()[shape.bias..shape.bias + shape.n_out].copy_from_slice(&values);
    }
    let (n, end) = lines.next("end")?;
    if end != "end" {
        return Err(Error::Checkpoint(format!("line {n}: expected `end`, found `{end}`")));
    }
    Ok(net)
}

pub fn save<T: Scalar>(net: &Mlp<T>, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(net)).map_err(|e| Error::io(path, e))
}

pub fn load<T: Scalar>(path: &Path) -> Result<Mlp<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
