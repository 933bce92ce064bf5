//! Rendering of reports as tables, JSON or CSV.

use std::fmt::Write;

use swm_core::equal_length::{EvenTensionResult, TensionFamily};
use swm_core::report::{OutcomeReport, OutcomeTag};
use swm_core::single_cable::{RotationalRange, SingleCableCheck};

pub const CSV_HEADER: &str =
    "l1,l2,l3,l4,outcome,taut,B1x,B1y,B1z,B2x,B2y,B2z,B3x,B3y,B3z,Cx,Cy,Cz,tau1,tau2,tau3,tau4,branch,phi";

fn join_numbers(v: &[usize], sep: &str) -> String {
    v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn phi_text(range: &[[f64; 2]]) -> String {
    if range.is_empty() {
        return "empty".into();
    }
    range
        .iter()
        .map(|[lo, hi]| format!("[{lo:.3}, {hi:.3}]"))
        .collect::<Vec<_>>()
        .join(" U ")
}

fn range_pairs(r: &RotationalRange) -> Vec<[f64; 2]> {
    r.intervals().iter().map(|&(lo, hi)| [lo, hi]).collect()
}

/// Human-readable report; coordinates in m, tensions in kN.
pub fn table(report: &OutcomeReport) -> String {
    let mut out = String::new();
    if let Some(l) = report.lengths {
        let _ = writeln!(out, "lengths (m): {:.3}, {:.3}, {:.3}, {:.3}", l[0], l[1], l[2], l[3]);
    }
    match report.outcome {
        OutcomeTag::Definite => {
            let _ = writeln!(
                out,
                "outcome: definite ({} branch), taut cables {{{}}}",
                report.branch.as_deref().unwrap_or("?"),
                join_numbers(&report.taut, ",")
            );
            if let Some(p) = &report.pose {
                let _ = writeln!(out, "{:<6}{:>12}{:>12}{:>12}", "point", "x (m)", "y (m)", "z (m)");
                for (name, v) in [("B1", p.B1), ("B2", p.B2), ("B3", p.B3), ("C", p.C)] {
                    let _ = writeln!(out, "{name:<6}{:>12.3}{:>12.3}{:>12.3}", v[0], v[1], v[2]);
                }
            }
            for (i, t) in report.tensions.iter().enumerate() {
                let _ = writeln!(out, "tau{} (kN): {:.3}", i + 1, t / 1e3);
            }
        }
        OutcomeTag::SingleCable => {
            let _ = writeln!(
                out,
                "outcome: platform hangs from cable {} alone; its pose is not determined",
                report.taut.first().copied().unwrap_or(0)
            );
            let _ = writeln!(out, "phi (rad): {}", phi_text(report.phi.as_deref().unwrap_or(&[])));
        }
        OutcomeTag::Infeasible => {
            let _ = writeln!(out, "outcome: infeasible, no tension state holds");
            for d in report.diagnostics.iter().flatten() {
                let _ = writeln!(out, "  {d}");
            }
        }
    }
    out
}

pub fn json(report: &OutcomeReport) -> String {
    serde_json::to_string(report).expect("report serialises")
}

pub fn csv_row(report: &OutcomeReport) -> String {
    let mut cells: Vec<String> = report
        .lengths
        .map(|l| l.iter().map(|v| v.to_string()).collect())
        .unwrap_or_else(|| vec![String::new(); 4]);
    cells.push(report.outcome.as_str().into());
    cells.push(join_numbers(&report.taut, " "));
    match &report.pose {
        Some(p) => cells.extend([p.B1, p.B2, p.B3, p.C].iter().flatten().map(|v| v.to_string())),
        None => cells.extend(std::iter::repeat_n(String::new(), 12)),
    }
    cells.extend(report.tensions.iter().map(|t| t.to_string()));
    cells.push(report.branch.clone().unwrap_or_default());
    cells.push(
        report
            .phi
            .as_ref()
            .map(|p| p.iter().map(|[lo, hi]| format!("{lo}:{hi}")).collect::<Vec<_>>().join(" "))
            .unwrap_or_default(),
    );
    cells.join(",")
}

#[derive(serde::Serialize)]
struct CriticalReport {
    cable: usize,
    l_min: f64,
    l_max: f64,
    length: f64,
    phi: Vec<[f64; 2]>,
}

#[derive(serde::Serialize)]
struct CheckReport {
    applicable: bool,
    shortest: Option<usize>,
    suspended: Option<bool>,
    cables: Vec<CriticalReport>,
    phi: Vec<[f64; 2]>,
}

pub fn check_single(check: Option<&SingleCableCheck>, lengths: &[f64; 4], as_json: bool) -> String {
    let Some(check) = check else {
        if as_json {
            let r = CheckReport {
                applicable: false,
                shortest: None,
                suspended: None,
                cables: Vec::new(),
                phi: Vec::new(),
            };
            return serde_json::to_string(&r).expect("serialises");
        }
        return "single-cable check: not applicable (equal lengths)\n".into();
    };
    let cables: Vec<CriticalReport> = check
        .per_cable
        .iter()
        .map(|(j, r)| {
            let c = check.critical.get(*j).expect("critical length per slack cable");
            CriticalReport {
                cable: j + 1,
                l_min: c.min,
                l_max: c.max,
                length: lengths[*j],
                phi: range_pairs(r),
            }
        })
        .collect();
    if as_json {
        let r = CheckReport {
            applicable: true,
            shortest: Some(check.shortest + 1),
            suspended: Some(check.suspended()),
            cables,
            phi: range_pairs(&check.range),
        };
        return serde_json::to_string(&r).expect("serialises");
    }
    let mut out = String::new();
    let _ = writeln!(out, "shortest cable: {}", check.shortest + 1);
    let _ = writeln!(out, "{:<7}{:>12}{:>12}{:>12}  phi_j (rad)", "cable", "l_min (m)", "l_max (m)", "l (m)");
    for c in &cables {
        let _ = writeln!(
            out,
            "{:<7}{:>12.4}{:>12.4}{:>12.4}  {}",
            c.cable,
            c.l_min,
            c.l_max,
            c.length,
            phi_text(&c.phi)
        );
    }
    let _ = writeln!(out, "phi (rad): {}", phi_text(&range_pairs(&check.range)));
    let verdict = if check.suspended() {
        format!("platform can hang from cable {} alone", check.shortest + 1)
    } else {
        "not suspended by a single cable".into()
    };
    let _ = writeln!(out, "verdict: {verdict}");
    out
}

#[derive(serde::Serialize)]
struct EvenReport {
    k1: f64,
    k2: f64,
    tensions: [f64; 4],
    tensions_over_mg: [f64; 4],
    delta_t: f64,
    tau4: f64,
    tau4_interval: [f64; 2],
    boundary_clamped: bool,
}

pub fn even_tension(k1: f64, k2: f64, weight: f64, even: &EvenTensionResult, family: &TensionFamily, as_json: bool) -> String {
    let t = even.tensions.as_array();
    if as_json {
        let r = EvenReport {
            k1,
            k2,
            tensions: t,
            tensions_over_mg: t.map(|v| v / weight),
            delta_t: even.delta_t,
            tau4: even.tau4_used,
            tau4_interval: [family.tau4_low, family.tau4_high],
            boundary_clamped: even.boundary_clamped,
        };
        return serde_json::to_string(&r).expect("serialises");
    }
    let mut out = String::new();
    let _ = writeln!(out, "centre of gravity offsets: k1 = {k1}, k2 = {k2}");
    for (i, v) in t.iter().enumerate() {
        let _ = writeln!(out, "tau{} (kN): {:.3}  ({:.4} mg)", i + 1, v / 1e3, v / weight);
    }
    let _ = writeln!(
        out,
        "tau4 interval: [{:.4} mg, {:.4} mg]",
        family.tau4_low / weight,
        family.tau4_high / weight
    );
    let _ = writeln!(out, "delta_t (kN): {:.3}  ({:.4} mg)", even.delta_t / 1e3, even.delta_t / weight);
    out
}
