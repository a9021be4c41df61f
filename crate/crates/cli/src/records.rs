use serde::Serialize;

use crate::output::{sig12, Record};

#[derive(Debug, Serialize)]
pub struct OneModeRecord {
    #[serde(serialize_with = "sig12")]
    pub gq: f64,
    #[serde(serialize_with = "sig12")]
    pub gp: f64,
    #[serde(serialize_with = "sig12")]
    pub lambda: f64,
    #[serde(serialize_with = "sig12")]
    pub nbar: f64,
    pub regime: &'static str,
    #[serde(serialize_with = "sig12")]
    pub gin_q: f64,
    #[serde(serialize_with = "sig12")]
    pub gin_p: f64,
    #[serde(serialize_with = "sig12")]
    pub gmod_q: f64,
    #[serde(serialize_with = "sig12")]
    pub gmod_p: f64,
    #[serde(serialize_with = "sig12")]
    pub mu: f64,
    #[serde(serialize_with = "sig12")]
    pub nu_bar: f64,
    #[serde(serialize_with = "sig12")]
    pub nu_out: f64,
    #[serde(serialize_with = "sig12")]
    pub chi: f64,
}

impl Record for OneModeRecord {
    const HEADER: &'static [&'static str] = &[
        "gq", "gp", "lambda", "nbar", "regime", "gin_q", "gin_p", "gmod_q", "gmod_p", "mu", "nu_bar", "nu_out", "chi",
    ];
}

#[derive(Debug, Serialize)]
pub struct ModeRecord {
    pub index: usize,
    #[serde(serialize_with = "sig12")]
    pub gq: f64,
    #[serde(serialize_with = "sig12")]
    pub gp: f64,
    pub set: &'static str,
    #[serde(serialize_with = "sig12")]
    pub lambda: f64,
    #[serde(serialize_with = "sig12")]
    pub gin_q: f64,
    #[serde(serialize_with = "sig12")]
    pub gin_p: f64,
    #[serde(serialize_with = "sig12")]
    pub gmod_q: f64,
    #[serde(serialize_with = "sig12")]
    pub gmod_p: f64,
    #[serde(serialize_with = "sig12")]
    pub mu: f64,
    #[serde(serialize_with = "sig12")]
    pub chi: f64,
}

impl Record for ModeRecord {
    const HEADER: &'static [&'static str] =
        &["index", "gq", "gp", "set", "lambda", "gin_q", "gin_p", "gmod_q", "gmod_p", "mu", "chi"];
}

#[derive(Debug, Serialize)]
pub struct FiniteSummary {
    pub modes: usize,
    #[serde(serialize_with = "sig12")]
    pub lambda: f64,
    #[serde(serialize_with = "sig12")]
    pub mu: f64,
    #[serde(serialize_with = "sig12")]
    pub c1: f64,
    #[serde(serialize_with = "sig12")]
    pub c1_per_mode: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Record for FiniteSummary {
    const HEADER: &'static [&'static str] = &["modes", "lambda", "mu", "c1", "c1_per_mode", "n1", "n2", "n3"];
}

#[derive(Debug, Serialize)]
pub struct SpectralRecord {
    /// NaN (null in JSON) for models without a single correlation parameter.
    #[serde(serialize_with = "sig12")]
    pub phi: f64,
    #[serde(serialize_with = "sig12")]
    pub nbar: f64,
    #[serde(serialize_with = "sig12")]
    pub mu: f64,
    #[serde(serialize_with = "sig12")]
    pub capacity: f64,
    #[serde(serialize_with = "sig12")]
    pub frac_n1: f64,
    #[serde(serialize_with = "sig12")]
    pub frac_n2: f64,
    #[serde(serialize_with = "sig12")]
    pub frac_n3: f64,
    pub global_wf: bool,
}

impl Record for SpectralRecord {
    const HEADER: &'static [&'static str] =
        &["phi", "nbar", "mu", "capacity", "frac_n1", "frac_n2", "frac_n3", "global_wf"];
}

#[derive(Debug, Serialize)]
pub struct NodeRecord {
    #[serde(serialize_with = "sig12")]
    pub x: f64,
    #[serde(serialize_with = "sig12")]
    pub weight: f64,
    #[serde(serialize_with = "sig12")]
    pub gq: f64,
    #[serde(serialize_with = "sig12")]
    pub gp: f64,
    #[serde(serialize_with = "sig12")]
    pub gin_q: f64,
    #[serde(serialize_with = "sig12")]
    pub gin_p: f64,
    #[serde(serialize_with = "sig12")]
    pub gmod_q: f64,
    #[serde(serialize_with = "sig12")]
    pub gmod_p: f64,
    #[serde(serialize_with = "sig12")]
    pub nu_bar: f64,
    #[serde(serialize_with = "sig12")]
    pub nu_out: f64,
    pub set: &'static str,
}

impl Record for NodeRecord {
    const HEADER: &'static [&'static str] =
        &["x", "weight", "gq", "gp", "gin_q", "gin_p", "gmod_q", "gmod_p", "nu_bar", "nu_out", "set"];
}

#[derive(Debug, Serialize)]
pub struct GainRecord {
    #[serde(serialize_with = "sig12")]
    pub nbar: f64,
    #[serde(serialize_with = "sig12")]
    pub snr: f64,
    #[serde(serialize_with = "sig12")]
    pub phi: f64,
    #[serde(serialize_with = "sig12")]
    pub capacity: f64,
    #[serde(serialize_with = "sig12")]
    pub rate: f64,
    #[serde(serialize_with = "sig12")]
    pub gain: f64,
}

impl Record for GainRecord {
    const HEADER: &'static [&'static str] = &["nbar", "snr", "phi", "capacity", "rate", "gain"];
}

#[derive(Debug, Serialize)]
pub struct DiagonalRecord {
    pub k: usize,
    #[serde(serialize_with = "sig12")]
    pub q: f64,
    #[serde(serialize_with = "sig12")]
    pub p: f64,
}

impl Record for DiagonalRecord {
    const HEADER: &'static [&'static str] = &["k", "q", "p"];
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub check: &'static str,
    #[serde(serialize_with = "sig12")]
    pub value: f64,
    #[serde(serialize_with = "sig12")]
    pub limit: f64,
    pub passed: bool,
}

impl Record for CheckRecord {
    const HEADER: &'static [&'static str] = &["check", "value", "limit", "passed"];
}

#[cfg(test)]
mod tests {
    use super::*;

    fn auto_header<R: Serialize>(r: &R) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(r).unwrap();
        let s = String::from_utf8(w.into_inner().unwrap()).unwrap();
        s.lines().next().unwrap().to_string()
    }

    fn check<R: Record>(r: &R) {
        assert_eq!(auto_header(r), R::HEADER.join(","));
    }

    #[test]
    fn headers_match_fields() {
        check(&OneModeRecord {
            gq: 0.0, gp: 0.0, lambda: 0.0, nbar: 0.0, regime: "", gin_q: 0.0, gin_p: 0.0, gmod_q: 0.0,
            gmod_p: 0.0, mu: 0.0, nu_bar: 0.0, nu_out: 0.0, chi: 0.0,
        });
        check(&ModeRecord {
            index: 0, gq: 0.0, gp: 0.0, set: "", lambda: 0.0, gin_q: 0.0, gin_p: 0.0, gmod_q: 0.0, gmod_p: 0.0,
            mu: 0.0, chi: 0.0,
        });
        check(&FiniteSummary { modes: 0, lambda: 0.0, mu: 0.0, c1: 0.0, c1_per_mode: 0.0, n1: 0, n2: 0, n3: 0 });
        check(&SpectralRecord {
            phi: 0.0, nbar: 0.0, mu: 0.0, capacity: 0.0, frac_n1: 0.0, frac_n2: 0.0, frac_n3: 0.0, global_wf: true,
        });
        check(&NodeRecord {
            x: 0.0, weight: 0.0, gq: 0.0, gp: 0.0, gin_q: 0.0, gin_p: 0.0, gmod_q: 0.0, gmod_p: 0.0, nu_bar: 0.0,
            nu_out: 0.0, set: "",
        });
        check(&GainRecord { nbar: 0.0, snr: 0.0, phi: 0.0, capacity: 0.0, rate: 0.0, gain: 0.0 });
        check(&DiagonalRecord { k: 0, q: 0.0, p: 0.0 });
        check(&CheckRecord { check: "", value: 0.0, limit: 0.0, passed: true });
    }
}
