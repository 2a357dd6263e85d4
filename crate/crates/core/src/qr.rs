//! The quadratic-residue family: inertia type the quadratic residues modulo
//! a prime `m ≡ 3 mod 4`, branched at `(m-1)/2` points. Its μ-ordinary
//! polygon at inert classes has a closed form which is checked here against
//! the general orbit computation.

use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, quadratic_residues, unit_residue};
use crate::dieudonne::{mu_ordinary_module, DmExpr};
use crate::error::{Error, Result};
use crate::kottwitz::mu_ordinary;
use crate::monodromy::MonodromyDatum;
use crate::newton::{NewtonPolygon, Slope};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrFamilyData {
    pub m: u32,
    pub n: usize,
    pub a: Vec<u32>,
    /// Signature value on quadratic residues.
    pub c1: u32,
    /// Signature value on non-residues.
    pub c2: u32,
    pub e1: u32,
    pub e2: u32,
    pub genus: u32,
    /// Lower bound on `p` under which the p-rank result for this family is
    /// known; reported, never enforced.
    pub p_lower_bound: u64,
}

pub fn qr_datum(m: u32) -> Result<(MonodromyDatum, QrFamilyData)> {
    if m < 7 || !is_prime(m) || m % 4 != 3 {
        return Err(Error::NotQrModulus(m));
    }
    let a = quadratic_residues(m);
    let datum = MonodromyDatum::from_residues(m, &a)?;
    let sig = datum.signature();
    let c1 = sig.f(1);
    let c2 = sig.f(m - 1);
    let genus = (m - 5) * (m - 1) / 4;
    if datum.genus() != genus || c1 == c2 || c1 + c2 != (m - 5) / 2 {
        return Err(Error::Inconsistent(format!(
            "QR family m = {m}: genus {}, c1 = {c1}, c2 = {c2}",
            datum.genus()
        )));
    }
    let data = QrFamilyData {
        m,
        n: a.len(),
        a,
        c1,
        c2,
        e1: c1.max(c2),
        e2: c1.min(c2),
        genus,
        p_lower_bound: u64::from(m) * u64::from(m - 7) / 2,
    };
    Ok((datum, data))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrClosedForm {
    pub data: QrFamilyData,
    /// `(ord^{2E2} ⊕ ss^{E1-E2})^{(m-1)/2}`.
    pub polygon: NewtonPolygon,
    /// `(L^{2E2} ⊕ N_{1,1}^{E1-E2})^{(m-1)/2}`.
    pub dm: DmExpr,
    pub slope_half_multiplicity: u32,
}

pub fn qr_mu_ordinary_closed_form(m: u32) -> Result<QrClosedForm> {
    let (_, data) = qr_datum(m)?;
    let k = (m - 1) / 2;
    let (ord, ss) = (2 * data.e2 * k, (data.e1 - data.e2) * k);
    let polygon = NewtonPolygon::ord(ord).merge(&NewtonPolygon::ss(ss));
    let mut parts = Vec::new();
    if ord > 0 {
        parts.push(format!("L^{ord}"));
    }
    if ss > 0 {
        parts.push(format!("N_{{1,1}}^{ss}"));
    }
    let dm: DmExpr = parts.join(" ⊕ ").parse()?;
    let slope_half_multiplicity = polygon.multiplicity(Slope::half());
    Ok(QrClosedForm {
        data,
        polygon,
        dm,
        slope_half_multiplicity,
    })
}

/// `multiplicity(1/2) ≥ 2√g`, compared as `mult² ≥ 4g` with integers.
pub fn slope_half_bound_holds(form: &QrClosedForm) -> bool {
    let mult = u64::from(form.slope_half_multiplicity);
    let g = u64::from(form.data.genus);
    mult * mult >= 4 * g && mult >= 2 * g.sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrCheck {
    pub m: u32,
    pub residue: u32,
    pub closed_form: String,
    pub computed: String,
    pub polygon_agrees: bool,
    pub module_agrees: bool,
}

impl QrCheck {
    pub fn ok(&self) -> bool {
        self.polygon_agrees && self.module_agrees
    }
}

/// Compares the closed form against the orbit-by-orbit computation at a
/// non-residue class `p`.
pub fn cross_check(m: u32, p: i64) -> Result<QrCheck> {
    let form = qr_mu_ordinary_closed_form(m)?;
    let residue = unit_residue(p, m)?;
    if form.data.a.contains(&residue) {
        return Err(Error::NotQnr { p: residue, m });
    }
    let (datum, _) = qr_datum(m)?;
    let computed = mu_ordinary(&datum, p)?;
    let module = mu_ordinary_module(&datum, p)?;
    Ok(QrCheck {
        m,
        residue,
        closed_form: form.polygon.to_string(),
        computed: computed.to_string(),
        polygon_agrees: computed == form.polygon,
        module_agrees: module.is_isomorphic(&form.dm.module()),
    })
}

/// Every non-residue class.
pub fn cross_check_all(m: u32) -> Result<Vec<QrCheck>> {
    let qr = quadratic_residues(m);
    (1..m)
        .filter(|x| !qr.contains(x))
        .map(|p| cross_check(m, i64::from(p)))
        .collect()
}
