//! Text weight file:
//!
//! ```text
//! ANNV1 5 <H> 4
//! # key value        (hyperparameters, optional)
//! W_1j .. W_5j       (H lines, one hidden unit's incoming weights each)
//! B_w1 .. B_wH       (1 line)
//! U_j1 .. U_j4       (H lines, one hidden unit's outgoing weights each)
//! B_u1 .. B_u4       (1 line)
//! ```

use super::network::{Network, N_IN, N_OUT};
use super::{AnnError, Hyperparams};
use crate::Scalar;

pub const FLOAT_MAGIC: &str = "ANNV1";

/// 17 significant digits: enough for an exact `f64` round trip.
fn fmt_value<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

fn push_row<T: Scalar>(out: &mut String, row: &[T]) {
    let cells: Vec<String> = row.iter().map(|v| fmt_value(*v)).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
}

pub fn export_weights_float<T: Scalar>(net: &Network<T>, hp: Option<&Hyperparams<T>>) -> String {
    let mut out = format!("{FLOAT_MAGIC} {N_IN} {} {N_OUT}\n", net.hidden());
    if let Some(hp) = hp {
        for (k, v) in hp.entries() {
            out.push_str(&format!("# {k} {v}\n"));
        }
    }
    for row in net.w_rows() {
        push_row(&mut out, row);
    }
    push_row(&mut out, net.bw_row());
    for row in net.u_rows() {
        push_row(&mut out, row);
    }
    push_row(&mut out, net.bu_row());
    out
}

/// Non-comment lines as `(line number, tokens)`.
pub(super) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then(|| (i + 1, content.split_whitespace().collect()))
    })
}

/// Parses the `<magic> 5 <H> 4 [extra...]` header, returning `(H, extra tokens)`.
pub(super) fn parse_header<'a>(
    line: usize,
    tokens: &[&'a str],
    magic: &str,
    extra: usize,
) -> Result<(usize, Vec<&'a str>), AnnError> {
    let err = |msg: String| AnnError::Parse { line, msg };
    if tokens.first() != Some(&magic) {
        return Err(err(format!("expected `{magic}` header")));
    }
    if tokens.len() != 4 + extra {
        return Err(err(format!("header needs {} fields", 4 + extra)));
    }
    if tokens[1] != "5" || tokens[3] != "4" {
        return Err(err(format!("unsupported dims {} {} {}", tokens[1], tokens[2], tokens[3])));
    }
    let hidden: usize = tokens[2].parse().map_err(|_| err(format!("bad hidden size `{}`", tokens[2])))?;
    if hidden == 0 {
        return Err(err("hidden size must be positive".into()));
    }
    Ok((hidden, tokens[4..].to_vec()))
}

/// Expected row widths after the header for a network with `hidden` units.
pub(super) fn row_widths(hidden: usize) -> Vec<usize> {
    let mut widths = vec![N_IN; hidden];
    widths.push(hidden);
    widths.extend(std::iter::repeat_n(N_OUT, hidden));
    widths.push(N_OUT);
    widths
}

/// Reads the body rows, checking each width, and parses every cell with `parse`.
pub(super) fn parse_body<'a, V>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    hidden: usize,
    parse: impl Fn(&str) -> Option<V>,
) -> Result<Vec<Vec<V>>, AnnError> {
    let mut rows = Vec::new();
    for width in row_widths(hidden) {
        let (line, tokens) = lines.next().ok_or(AnnError::Parse { line: 0, msg: "unexpected end of file".into() })?;
        if tokens.len() != width {
            return Err(AnnError::Parse { line, msg: format!("expected {width} values, got {}", tokens.len()) });
        }
        let row = tokens
            .iter()
            .map(|t| parse(t).ok_or_else(|| AnnError::Parse { line, msg: format!("bad value `{t}`") }))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if let Some((line, _)) = lines.next() {
        return Err(AnnError::Parse { line, msg: "trailing data".into() });
    }
    Ok(rows)
}

/// `(W rows, Bw, U rows, Bu)` in file order.
pub(super) type Layers<V> = (Vec<[V; N_IN]>, Vec<V>, Vec<[V; N_OUT]>, [V; N_OUT]);

pub(super) fn assemble<V: Copy>(rows: Vec<Vec<V>>, hidden: usize) -> Layers<V> {
    let mut it = rows.into_iter();
    let w = it.by_ref().take(hidden).map(|r| std::array::from_fn(|i| r[i])).collect();
    let bw = it.next().unwrap();
    let u = it.by_ref().take(hidden).map(|r| std::array::from_fn(|k| r[k])).collect();
    let bu_row = it.next().unwrap();
    (w, bw, u, std::array::from_fn(|k| bu_row[k]))
}

pub fn import_weights_float<T: Scalar>(text: &str) -> Result<Network<T>, AnnError> {
    let mut lines = content_lines(text);
    let (line, tokens) = lines.next().ok_or(AnnError::Parse { line: 1, msg: "empty weight file".into() })?;
    let (hidden, _) = parse_header(line, &tokens, FLOAT_MAGIC, 0)?;
    let rows = parse_body(&mut lines, hidden, |t| t.parse::<f64>().ok().filter(|v| v.is_finite()).map(T::lit))?;
    let (w, bw, u, bu) = assemble(rows, hidden);
    Network::new(w, bw, u, bu)
}
