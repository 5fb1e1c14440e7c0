//! JSON and CSV forms of tree functions, sequences and diagnostic tables.
//!
//! Exact values are written as fraction strings (`a` and `b` of `a + b√q`);
//! float columns are always present for plotting. In float mode the exact
//! columns stay empty.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::energy::{EnergyReport, GapReport, HuygensReport};
use crate::error::{Error, Result};
use crate::function::{HeightSequence, RadialProfile, Site, TreeFunction};
use crate::scalar::Scalar;

/// `{"q": 2, "entries": [{"vertex": "0,1", "value": {...}}]}`, cones as `"0,1,*,*"`.
pub fn tree_function_to_json<S: Scalar>(f: &TreeFunction<S>) -> Value {
    let entries: Vec<Value> = f
        .sites()
        .map(|(site, v)| json!({ "vertex": site.to_string(), "value": v.to_json() }))
        .collect();
    json!({ "q": f.q(), "entries": entries })
}

fn object<'a>(value: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::Parse(format!("{what} must be a JSON object")))
}

fn read_q(obj: &Map<String, Value>, fallback: Option<u32>) -> Result<u32> {
    match obj.get("q") {
        Some(v) => v
            .as_u64()
            .and_then(|q| u32::try_from(q).ok())
            .ok_or_else(|| Error::Parse(format!("`q` must be a positive integer, got {v}"))),
        None => fallback.ok_or_else(|| Error::Parse("missing `q`".into())),
    }
}

fn entries(obj: &Map<String, Value>) -> Result<&[Value]> {
    match obj.get("entries") {
        Some(Value::Array(a)) => Ok(a),
        None => Ok(&[]),
        Some(other) => Err(Error::Parse(format!(
            "`entries` must be an array, got {other}"
        ))),
    }
}

fn field<'a>(entry: &'a Value, key: &str) -> Result<&'a Value> {
    entry
        .get(key)
        .ok_or_else(|| Error::Parse(format!("entry {entry} lacks `{key}`")))
}

/// Inverse of [`tree_function_to_json`]. `q` may be omitted when `default_q` is given.
pub fn tree_function_from_json<S: Scalar>(
    value: &Value,
    default_q: Option<u32>,
) -> Result<TreeFunction<S>> {
    let obj = object(value, "tree function")?;
    let q = read_q(obj, default_q)?;
    let mut sites = Vec::new();
    for entry in entries(obj)? {
        let label = field(entry, "vertex")?
            .as_str()
            .ok_or_else(|| Error::Parse(format!("`vertex` must be a string in {entry}")))?;
        sites.push((
            Site::parse(q, label)?,
            S::from_json(field(entry, "value")?, q)?,
        ));
    }
    let cone_apex = sites.iter().find_map(|(s, _)| match s {
        Site::Cone { apex, .. } => Some(apex.depth()),
        Site::Vertex(_) => None,
    });
    let resolution =
        cone_apex.unwrap_or_else(|| sites.iter().map(|(s, _)| s.radius()).max().unwrap_or(0));
    let mut merged: std::collections::BTreeMap<Site, S> = std::collections::BTreeMap::new();
    for (site, v) in sites {
        let slot = merged.entry(site).or_insert_with(|| S::zero(q));
        *slot = slot.clone() + &v;
    }
    TreeFunction::from_sites(q, resolution, merged)
}

pub fn profile_to_json<S: Scalar>(p: &RadialProfile<S>) -> Value {
    let entries: Vec<Value> = p
        .iter()
        .map(|(n, v)| json!({ "n": n, "value": v.to_json() }))
        .collect();
    json!({ "q": p.q(), "entries": entries })
}

pub fn profile_from_json<S: Scalar>(
    value: &Value,
    default_q: Option<u32>,
) -> Result<RadialProfile<S>> {
    let obj = object(value, "radial profile")?;
    let q = read_q(obj, default_q)?;
    let mut pairs = Vec::new();
    for entry in entries(obj)? {
        let n = field(entry, "n")?
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| Error::Parse(format!("`n` must be a natural number in {entry}")))?;
        pairs.push((n, S::from_json(field(entry, "value")?, q)?));
    }
    Ok(RadialProfile::from_pairs(q, pairs))
}

pub fn heights_to_json<S: Scalar>(s: &HeightSequence<S>) -> Value {
    let entries: Vec<Value> = s
        .iter()
        .map(|(h, v)| json!({ "h": h, "value": v.to_json() }))
        .collect();
    json!({ "q": s.q(), "entries": entries })
}

pub fn heights_from_json<S: Scalar>(
    value: &Value,
    default_q: Option<u32>,
) -> Result<HeightSequence<S>> {
    let obj = object(value, "height sequence")?;
    let q = read_q(obj, default_q)?;
    let mut pairs = Vec::new();
    for entry in entries(obj)? {
        let h = field(entry, "h")?
            .as_i64()
            .ok_or_else(|| Error::Parse(format!("`h` must be an integer in {entry}")))?;
        pairs.push((h, S::from_json(field(entry, "value")?, q)?));
    }
    Ok(HeightSequence::from_pairs(q, pairs))
}

/// `[a, b, float]`, with empty exact columns in float mode.
pub fn scalar_columns<S: Scalar>(v: &S) -> [String; 3] {
    let (a, b) = v.exact_parts().unwrap_or_default();
    [a, b, v.to_f64().to_string()]
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?
        .flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// One row per nonzero site: `vertex,value_a,value_b,float`.
pub fn write_snapshot_csv<S: Scalar, W: Write>(f: &TreeFunction<S>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["vertex", "value_a", "value_b", "float"])
        .map_err(csv_error)?;
    for (site, v) in f.sites() {
        let [a, b, x] = scalar_columns(v);
        w.write_record([site.to_string(), a, b, x])
            .map_err(csv_error)?;
    }
    finish(w)
}

pub fn write_energy_csv<S: Scalar, W: Write>(rows: &[EnergyReport<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n", "K_a", "K_b", "P_a", "P_b", "E_a", "E_b", "gap_a", "gap_b", "K", "P", "E", "gap",
    ])
    .map_err(csv_error)?;
    for r in rows {
        let cols = [&r.kinetic, &r.potential, &r.total, &r.gap].map(scalar_columns);
        let mut rec = vec![r.n.to_string()];
        rec.extend(cols.iter().flat_map(|c| [c[0].clone(), c[1].clone()]));
        rec.extend(cols.iter().map(|c| c[2].clone()));
        w.write_record(rec).map_err(csv_error)?;
    }
    finish(w)
}

pub fn write_gap_csv<S: Scalar, W: Write>(rows: &[GapReport<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "direct_a",
        "direct_b",
        "operator_a",
        "operator_b",
        "direct",
        "operator",
        "bound",
    ])
    .map_err(csv_error)?;
    for r in rows {
        let [da, db, d] = scalar_columns(&r.direct);
        let [oa, ob, o] = scalar_columns(&r.operator);
        w.write_record([r.n.to_string(), da, db, oa, ob, d, o, r.bound.to_string()])
            .map_err(csv_error)?;
    }
    finish(w)
}

pub fn write_huygens_csv<S: Scalar, W: Write>(rows: &[HuygensReport<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "N",
        "mass_a",
        "mass_b",
        "gradient_a",
        "gradient_b",
        "kinetic_a",
        "kinetic_b",
        "mass",
        "gradient",
        "kinetic",
    ])
    .map_err(csv_error)?;
    for r in rows {
        let cols =
            [&r.interior_mass, &r.interior_gradient, &r.interior_kinetic].map(scalar_columns);
        let mut rec = vec![r.n.to_string(), r.margin.to_string()];
        rec.extend(cols.iter().flat_map(|c| [c[0].clone(), c[1].clone()]));
        rec.extend(cols.iter().map(|c| c[2].clone()));
        w.write_record(rec).map_err(csv_error)?;
    }
    finish(w)
}

/// `h,exact_value_a,exact_value_b,float_value` (or `n,...` for profiles).
pub fn write_sequence_csv<K: ToString, S: Scalar, W: Write>(
    key: &str,
    rows: impl IntoIterator<Item = (K, S)>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([key, "exact_value_a", "exact_value_b", "float_value"])
        .map_err(csv_error)?;
    for (k, v) in rows {
        let [a, b, x] = scalar_columns(&v);
        w.write_record([k.to_string(), a, b, x])
            .map_err(csv_error)?;
    }
    finish(w)
}
