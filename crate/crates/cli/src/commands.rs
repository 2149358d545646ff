//! Subcommand implementations. Each returns data; rendering happens in
//! [`crate::config::run`].

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use selfish_cc_core::bounds::{
    coding_gain_bound, f_coefficient, f_coefficient_lsum, lp_lower_bound, lp_vertex_enumeration, r_lb,
    r_man, uncoded_selfish, uncoded_unselfish,
};
use selfish_cc_core::delivery::{
    alpha_demand_scheme, circular_scheme_5_4, circular_scheme_6_5_t3, uncoded_scheme, verify_decodability,
    DecodeReport, DeliveryScheme,
};
use selfish_cc_core::demands::{
    alpha_demand_witness, circular_demand, circular_demand_count, circular_shifts, circular_witness,
    count_shifts_by_rotation, count_shifts_with_k1_before_k2, enumerate_circular_demands, UserPermutation,
};
use selfish_cc_core::fds::{enumerate_valid_demands, FdsStructure};
use selfish_cc_core::oracle::{
    acyclic_set_general, alpha_demand_converse, alpha_demand_with_acyclic_outside, appearance_count_formula,
    appearance_counts, circular_bound_count, circular_bound_sum, is_acyclic, GeneralPlacementProfile,
};
use selfish_cc_core::placement::{selfish_man_placement, Placement};
use selfish_cc_core::{Demand, Error, Rational, UserSet};

use crate::decimal::to_decimal;
use crate::schemefile::{format_subfile, format_users};
use crate::sweep::par_chunks;
use crate::table::{Cell, Table};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d).expect("nonzero denominator")
}

/// Memory-load trade-off rows for `t = 0..=K`.
pub fn tradeoff(s: &FdsStructure) -> Result<Table> {
    let mut table = Table::new(&["t", "M", "R_lb", "R_man", "R_uncoded_selfish", "R_uncoded_unselfish"]);
    let (k, a) = (s.users(), s.alpha());
    let n = i64::try_from(s.library_size())?;
    for t in 0..=k.max(a) {
        let selfish = |v: Result<Rational, Error>| -> Result<Cell> {
            Ok(if t <= a { Cell::from(v?) } else { Cell::Empty })
        };
        table.push(vec![
            Cell::from(t),
            Cell::from(q(i64::from(t) * n, i64::from(k))),
            selfish(r_lb(k, a, t.min(a)))?,
            Cell::from(r_man(k, t)?),
            selfish(uncoded_selfish(k, a, t.min(a)))?,
            Cell::from(uncoded_unselfish(k, t)?),
        ]);
    }
    Ok(table)
}

/// The three `alpha` rules of the gains sweep, as fractions of `K`.
pub const ALPHA_RULES: [(&str, i64, i64); 3] = [("half", 1, 2), ("four_fifths", 4, 5), ("nineteen_twentieths", 19, 20)];

pub fn default_gain_grid() -> Vec<u32> {
    (20..=400).step_by(20).collect()
}

/// Coding gains over a grid of `K` at fixed `gamma`. A rule whose `alpha`
/// is not an integer for some `K`, or for which `gamma > alpha/K`, leaves an
/// empty cell.
pub fn gains(gamma: Rational, grid: &[u32]) -> Result<Table> {
    if !(Rational::ZERO..=Rational::ONE).contains(&gamma) {
        bail!(Error::OutOfRange { what: "gamma", value: gamma.floor(), min: 0, max: 1 });
    }
    let mut columns = vec!["K".to_string(), "unselfish".to_string()];
    for (name, _, _) in ALPHA_RULES {
        columns.push(format!("bound_{name}"));
    }
    for (name, _, _) in ALPHA_RULES {
        columns.push(format!("limit_{name}"));
    }
    let mut table = Table { columns, rows: Vec::new() };
    for &k in grid {
        let mut row = vec![Cell::from(k), Cell::from(Rational::from(k) * gamma + Rational::ONE)];
        let mut limits = Vec::new();
        for (_, num, den) in ALPHA_RULES {
            let alpha = i64::from(k) * num;
            if alpha % den != 0 || alpha / den < 1 {
                row.push(Cell::Empty);
                limits.push(Cell::Empty);
                continue;
            }
            let alpha = u32::try_from(alpha / den)?;
            match coding_gain_bound(k, alpha, gamma) {
                Ok(g) => {
                    row.push(Cell::from(g.bound));
                    limits.push(Cell::from(g.limit));
                }
                Err(Error::OutOfRange { .. }) => {
                    row.push(Cell::Empty);
                    limits.push(Cell::from(coding_gain_bound(k, alpha, Rational::ZERO)?.limit));
                }
                Err(e) => return Err(e.into()),
            }
        }
        row.extend(limits);
        table.push(row);
    }
    Ok(table)
}

/// Built-in worked examples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
pub enum Scenario {
    #[value(name = "5-4-1-t2")]
    FiveFourT2,
    #[value(name = "5-4-1-t3")]
    FiveFourT3,
    #[value(name = "6-5-1-t3")]
    SixFiveT3,
    #[value(name = "5-3-3-t2")]
    AlphaDemand,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::FiveFourT2, Scenario::FiveFourT3, Scenario::SixFiveT3, Scenario::AlphaDemand];

    pub fn instance(self) -> (FdsStructure, u32, Demand) {
        let set = |d: &str| UserSet::from_users(d.bytes().map(|b| u32::from(b - b'0')));
        let five_four = || Demand::first_files(["1234", "2345", "1345", "1245", "1235"].map(set).to_vec());
        match self {
            Scenario::FiveFourT2 => (FdsStructure::new(5, 4, 1).unwrap(), 2, five_four()),
            Scenario::FiveFourT3 => (FdsStructure::new(5, 4, 1).unwrap(), 3, five_four()),
            Scenario::SixFiveT3 => {
                let s = FdsStructure::new(6, 5, 1).unwrap();
                let dm = circular_demand(&s, &UserPermutation::identity(6), vec![1; 6]).unwrap();
                (s, 3, dm)
            }
            Scenario::AlphaDemand => {
                let classes = ["123", "123", "123", "124", "125"].map(set).to_vec();
                (FdsStructure::new(5, 3, 3).unwrap(), 2, Demand::new(classes, vec![1, 2, 3, 1, 1]).unwrap())
            }
        }
    }
}

/// Which construction a demo used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SchemeKind {
    AlphaDemand { group: String },
    Circular { ordering: Vec<u32> },
    Uncoded,
}

#[derive(Clone, Debug)]
pub struct DemoReport {
    pub structure: FdsStructure,
    pub t: u32,
    pub demand: Demand,
    pub kind: SchemeKind,
    pub scheme: DeliveryScheme,
    pub decoding: DecodeReport,
    pub load: Rational,
    /// Converse value the load is compared against.
    pub bound: Rational,
    /// Independently computed alpha-demand converse, when applicable.
    pub alpha_converse: Option<Rational>,
}

impl DemoReport {
    pub fn tight(&self) -> bool {
        self.load == self.bound && self.alpha_converse.is_none_or(|c| c == self.load)
    }

    pub fn passed(&self) -> bool {
        self.tight() && self.decoding.all_decodable()
    }

    pub fn render_text(&self, precision: usize) -> String {
        let p = selfish_man_placement(&self.structure, self.t).expect("validated");
        let mut out = String::new();
        let _ = writeln!(
            out,
            "structure {}  t = {}  subpacketization {}  M = {}",
            self.structure,
            self.t,
            p.subpacketization(),
            p.memory()
        );
        let _ = writeln!(out, "demand {}", self.demand);
        match &self.kind {
            SchemeKind::AlphaDemand { group } => {
                let _ = writeln!(out, "scheme alpha-demand, group {group}");
            }
            SchemeKind::Circular { ordering } => {
                let _ = writeln!(out, "scheme circular, ordering {ordering:?}");
            }
            SchemeKind::Uncoded => {
                let _ = writeln!(out, "scheme uncoded (no tight construction for this demand)");
            }
        }
        for (i, m) in self.scheme.messages().iter().enumerate() {
            let ids: Vec<String> = m.subfiles().iter().map(format_subfile).collect();
            let _ = writeln!(out, "  X{} = {}", i + 1, ids.join(" + "));
        }
        for ud in &self.decoding.users {
            let status = if ud.decodable { "decodes" } else { "FAILS" };
            let _ = writeln!(out, "user {}: {status}", ud.user);
            for (id, cert) in &ud.certificates {
                let xs: Vec<String> = cert.iter().map(|i| format!("X{}", i + 1)).collect();
                let _ = writeln!(out, "  {} <- {}", format_subfile(id), xs.join(" + "));
            }
            for id in &ud.missing {
                let _ = writeln!(out, "  {} missing", format_subfile(id));
            }
        }
        let _ = writeln!(
            out,
            "load {} ({})  bound {} ({})  {}",
            self.load,
            to_decimal(self.load, precision),
            self.bound,
            to_decimal(self.bound, precision),
            if self.tight() { "tight" } else { "NOT tight" }
        );
        if let Some(c) = self.alpha_converse {
            let _ = writeln!(out, "alpha-demand converse {c}");
        }
        let _ = writeln!(
            out,
            "decodable {}/{}",
            self.decoding.decodable_count(),
            self.decoding.users.len()
        );
        out
    }

    pub fn to_json(&self, precision: usize) -> serde_json::Value {
        let exact = |r: Rational| serde_json::json!({"decimal": to_decimal(r, precision), "num": r.numer(), "den": r.denom()});
        let users: Vec<serde_json::Value> = self
            .decoding
            .users
            .iter()
            .map(|ud| {
                let certs: Vec<serde_json::Value> = ud
                    .certificates
                    .iter()
                    .map(|(id, c)| serde_json::json!({"subfile": format_subfile(id), "messages": c}))
                    .collect();
                serde_json::json!({
                    "user": ud.user,
                    "decodable": ud.decodable,
                    "certificates": certs,
                    "missing": ud.missing.iter().map(format_subfile).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "structure": [self.structure.users(), self.structure.alpha(), self.structure.files_per_class()],
            "t": self.t,
            "demand": {
                "classes": self.demand.classes().iter().map(|c| format_users(*c)).collect::<Vec<_>>(),
                "files": self.demand.files(),
            },
            "kind": self.kind,
            "messages": self.scheme.messages().iter()
                .map(|m| m.subfiles().iter().map(format_subfile).collect::<Vec<_>>().join("+"))
                .collect::<Vec<_>>(),
            "users": users,
            "load": exact(self.load),
            "bound": exact(self.bound),
            "alpha_converse": self.alpha_converse.map(exact),
            "tight": self.tight(),
            "passed": self.passed(),
        })
    }
}

/// Builds the best available scheme for `dm` and checks it against the
/// converse: alpha-demand scheme, else a circular template, else uncoded.
pub fn demo(s: &FdsStructure, t: u32, dm: &Demand) -> Result<DemoReport> {
    let p = selfish_man_placement(s, t)?;
    let bound = r_lb(s.users(), s.alpha(), t)?;
    let (kind, scheme, alpha_converse) = if let Some(group) = alpha_demand_witness(s, dm)? {
        let converse = alpha_demand_converse(&p, dm).ok();
        (SchemeKind::AlphaDemand { group: format_users(group) }, alpha_demand_scheme(&p, dm)?, converse)
    } else if let Some((u, sc)) = circular_template(&p, dm)? {
        (SchemeKind::Circular { ordering: u.order().to_vec() }, sc, None)
    } else {
        (SchemeKind::Uncoded, uncoded_scheme(&p, dm)?, None)
    };
    let decoding = verify_decodability(&p, dm, &scheme)?;
    Ok(DemoReport {
        structure: *s,
        t,
        demand: dm.clone(),
        kind,
        load: scheme.load(),
        scheme,
        decoding,
        bound,
        alpha_converse,
    })
}

fn circular_template(p: &Placement, dm: &Demand) -> Result<Option<(UserPermutation, DeliveryScheme)>> {
    let s = p.structure();
    let supported = matches!((s.users(), s.alpha(), p.t()), (5, 4, 2) | (5, 4, 3) | (6, 5, 3));
    if !supported {
        return Ok(None);
    }
    let Some(u) = circular_witness(s, dm)? else { return Ok(None) };
    let sc = if s.users() == 5 { circular_scheme_5_4(p, dm, &u)? } else { circular_scheme_6_5_t3(p, dm, &u)? };
    Ok(Some((u, sc)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    CapExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub status: Status,
    /// Number of checked items (demands, bounds, sets, ...).
    pub checked: u128,
    pub detail: String,
    pub millis: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub structure: [u32; 3],
    pub properties: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn any_failed(&self) -> bool {
        self.properties.iter().any(|p| p.status == Status::Fail)
    }

    pub fn any_cap_exceeded(&self) -> bool {
        self.properties.iter().any(|p| p.status == Status::CapExceeded)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["property", "status", "checked", "detail", "millis"]);
        for p in &self.properties {
            let status = match p.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Skipped => "skipped",
                Status::CapExceeded => "cap-exceeded",
            };
            t.push(vec![
                Cell::from(p.name),
                Cell::from(status),
                Cell::from(p.checked),
                Cell::Text(p.detail.clone()),
                Cell::from(p.millis),
            ]);
        }
        t
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub cap: u64,
    pub seed: u64,
    pub lp_samples: usize,
}

type Outcome = (Status, u128, String);

fn pass_if(ok: bool, checked: u128, detail: String) -> Outcome {
    (if ok { Status::Pass } else { Status::Fail }, checked, detail)
}

fn run_property(name: &'static str, f: impl FnOnce() -> Result<Outcome, Error>) -> PropertyResult {
    let start = Instant::now();
    let (status, checked, detail) = match f() {
        Ok(o) => o,
        Err(e @ Error::CapExceeded { .. }) => (Status::CapExceeded, 0, e.to_string()),
        Err(e) => (Status::Fail, 0, e.to_string()),
    };
    PropertyResult { name, status, checked, detail, millis: start.elapsed().as_millis() }
}

type Circular = Vec<(Demand, UserPermutation)>;

/// Every verification property on one structure. Properties that exceed the
/// cap are reported as such; the others still run.
pub fn verify(s: &FdsStructure, opts: VerifyOptions) -> VerifyReport {
    let circular: Result<Circular, Error> =
        enumerate_circular_demands(s, opts.cap).map(|it| it.collect());
    let with_circular = |f: &dyn Fn(&Circular) -> Result<Outcome, Error>| match &circular {
        Ok(c) => f(c),
        Err(e) => Err(e.clone()),
    };
    let (k, a) = (s.users(), s.alpha());

    let mut properties = vec![run_property("circular-count", || {
        with_circular(&|c| {
            let formula = circular_demand_count(s).ok_or(Error::Overflow)?;
            let mut ok = c.len() as u128 == formula;
            let mut detail = format!("enumerated {} vs f^K (K-1)! = {formula}", c.len());
            let bijective = a >= 2 && a < k;
            if bijective && s.valid_demand_count().is_some_and(|n| n <= u128::from(opts.cap)) {
                let filtered = enumerate_valid_demands(s, opts.cap)?
                    .filter(|dm| circular_witness(s, dm).is_ok_and(|w| w.is_some()))
                    .count();
                ok &= filtered as u128 == formula;
                let _ = write!(detail, "; filtered valid demands {filtered}");
            }
            Ok(pass_if(ok, formula, detail))
        })
    })];

    properties.push(run_property("acyclic-sets", || {
        with_circular(&|c| {
            let failures: Vec<usize> = par_chunks(c, |chunk| {
                chunk
                    .iter()
                    .flat_map(|(dm, u)| circular_shifts(u).into_iter().map(move |r| (dm, r)))
                    .filter(|(dm, r)| !acyclic_set_general(s, dm, r).is_ok_and(|set| is_acyclic(&set)))
                    .count()
            });
            let failed: usize = failures.iter().sum();
            let checked = c.len() as u128 * u128::from(k);
            Ok(pass_if(failed == 0, checked, format!("{failed} cyclic sets")))
        })
    }));

    properties.push(run_property("averaged-bound", || {
        with_circular(&|c| {
            let mut bad = Vec::new();
            let mut bounds = 0;
            for t in 0..=a {
                let profile = GeneralPlacementProfile::man(a, t)?;
                let parts = par_chunks(c, |chunk| circular_bound_sum(s, &profile, chunk.iter().cloned()));
                let mut total = Rational::ZERO;
                let mut count = 0u128;
                for part in parts {
                    let (sum, n) = part?;
                    total = total.checked_add(&sum)?;
                    count += n;
                }
                bounds = count;
                let avg = total.checked_div(&Rational::from_counts(count, 1)?)?;
                if avg != r_lb(k, a, t)? {
                    bad.push(format!("t={t}: {avg}"));
                }
            }
            let expected = circular_bound_count(s).ok_or(Error::Overflow)?;
            let detail = if bad.is_empty() {
                format!("{bounds} bounds per t, average equals r_lb for t = 0..={a}")
            } else {
                format!("mismatch {}", bad.join(", "))
            };
            Ok(pass_if(bad.is_empty() && bounds == expected, bounds, detail))
        })
    }));

    properties.push(run_property("appearance-counts", || {
        let mut checked = 0u128;
        let mut bad = Vec::new();
        for t in 0..a {
            let counts = appearance_counts(s, t, opts.cap)?;
            let expected = appearance_count_formula(s, t)?;
            let p = selfish_man_placement(s, t)?;
            let subfiles = s.class_count() * u128::from(s.files_per_class()) * p.subpacketization();
            checked += counts.len() as u128;
            if counts.len() as u128 != subfiles || counts.iter().any(|(_, n)| *n != expected) {
                bad.push(t);
            }
        }
        Ok(pass_if(bad.is_empty(), checked, format!("failing t: {bad:?}")))
    }));

    properties.push(run_property("coefficient-identity", || {
        let mut bad = Vec::new();
        for t in 0..=a {
            if f_coefficient(k, a, t)? != f_coefficient_lsum(k, a, t)? {
                bad.push(t);
            }
        }
        Ok(pass_if(bad.is_empty(), u128::from(a) + 1, format!("closed form vs l-sum, failing t: {bad:?}")))
    }));

    properties.push(run_property("circular-schemes", || {
        let ts: &[u32] = match (k, a) {
            (5, 4) => &[2, 3],
            (6, 5) => &[3],
            _ => return Ok((Status::Skipped, 0, "no circular construction for this structure".into())),
        };
        with_circular(&|c| {
            let mut checked = 0;
            let mut failures = 0;
            for &t in ts {
                let p = selfish_man_placement(s, t)?;
                let bound = r_lb(k, a, t)?;
                let results = par_chunks(c, |chunk| {
                    chunk
                        .iter()
                        .filter(|(dm, u)| {
                            let sc = if k == 5 { circular_scheme_5_4(&p, dm, u) } else { circular_scheme_6_5_t3(&p, dm, u) };
                            !sc.and_then(|sc| {
                                let report = verify_decodability(&p, dm, &sc)?;
                                Ok(sc.load() == bound && report.all_decodable())
                            })
                            .unwrap_or(false)
                        })
                        .count()
                });
                failures += results.iter().sum::<usize>();
                checked += c.len() as u128;
            }
            Ok(pass_if(failures == 0, checked, format!("{failures} demands not tight or not decodable; t in {ts:?}")))
        })
    }));

    properties.push(run_property("alpha-demand", || {
        if s.files_per_class() < a {
            return Ok((Status::Skipped, 0, "alpha-demands need f >= alpha".into()));
        }
        let dm = alpha_demand_with_acyclic_outside(s, UserSet::first(a), UserSet::first(a - 1))?;
        let mut bad = Vec::new();
        for t in 0..=a {
            let p = selfish_man_placement(s, t)?;
            let sc = alpha_demand_scheme(&p, &dm)?;
            let converse = alpha_demand_converse(&p, &dm)?;
            let ok = verify_decodability(&p, &dm, &sc)?.all_decodable()
                && sc.load() == converse
                && converse == r_lb(k, a, t)?;
            if !ok {
                bad.push(t);
            }
        }
        Ok(pass_if(bad.is_empty(), u128::from(a) + 1, format!("failing t: {bad:?}")))
    }));

    properties.push(run_property("lp-agreement", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let fds = i64::try_from(s.fds_size()).map_err(|_| Error::Overflow)?;
        let mut bad = 0;
        for _ in 0..opts.lp_samples {
            let den = rng.gen_range(1..=1000i64);
            let memory = Rational::new(rng.gen_range(0..=den) * fds, den)?;
            if lp_lower_bound(s, memory)? != lp_vertex_enumeration(s, memory)? {
                bad += 1;
            }
        }
        Ok(pass_if(bad == 0, opts.lp_samples as u128, format!("{bad} disagreements, seed {}", opts.seed)))
    }));

    properties.push(run_property("shift-count", || {
        with_circular(&|c| {
            let mut orderings: Vec<&UserPermutation> = c.iter().map(|(_, u)| u).collect();
            orderings.dedup();
            let mut checked = 0u128;
            let mut ok = true;
            for u in orderings {
                for k1 in 1..=k {
                    for k2 in (1..=k).filter(|&x| x != k1) {
                        ok &= count_shifts_with_k1_before_k2(u, k1, k2)? == count_shifts_by_rotation(u, k1, k2)?;
                        checked += 1;
                    }
                }
            }
            Ok(pass_if(ok, checked, "K - l vs rotation count".into()))
        })
    }));

    VerifyReport { structure: [k, a, s.files_per_class()], properties }
}

/// Closed-form and, within the cap, enumerated counts.
pub fn count(s: &FdsStructure, cap: u64) -> Result<Table> {
    let mut table = Table::new(&["quantity", "closed_form", "enumerated"]);
    let within = |n: Option<u128>| n.is_some_and(|n| n <= u128::from(cap));
    let opt = |n: Option<u128>| n.map_or(Cell::Empty, Cell::from);
    table.push(vec![Cell::from("classes"), Cell::from(s.class_count()), Cell::from(s.classes().count() as u128)]);
    table.push(vec![Cell::from("library_size"), Cell::from(s.library_size()), Cell::Empty]);
    table.push(vec![Cell::from("fds_size"), Cell::from(s.fds_size()), Cell::Empty]);

    let valid = s.valid_demand_count();
    let valid_enum = if within(valid) { Some(enumerate_valid_demands(s, cap)?.count() as u128) } else { None };
    table.push(vec![Cell::from("valid_demands"), opt(valid), opt(valid_enum)]);

    let circ = circular_demand_count(s);
    let circ_enum = if within(circ) {
        let pairs: Vec<(Demand, UserPermutation)> = enumerate_circular_demands(s, cap)?.collect();
        let distinct: std::collections::BTreeSet<&Demand> = pairs.iter().map(|(d, _)| d).collect();
        Some(if s.alpha() >= 2 && s.alpha() < s.users() { distinct.len() } else { pairs.len() } as u128)
    } else {
        None
    };
    table.push(vec![Cell::from("circular_demands"), opt(circ), opt(circ_enum)]);
    table.push(vec![Cell::from("circular_bounds"), opt(circular_bound_count(s)), Cell::Empty]);
    Ok(table)
}
