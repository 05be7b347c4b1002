//! Text report of the tuned parameters.

use std::fmt::Write;

use adm_core::AdmParams64;

/// Fifteen significant digits.
fn sig(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn report(p: &AdmParams64) -> String {
    let mut s = String::new();
    let t = &p.thresholds;
    let rows: [(&str, f64); 15] = [
        ("mu", p.mu),
        ("L", p.l),
        ("sigma", p.sigma),
        ("q", p.q),
        ("g1", t.g1),
        ("g2", t.g2),
        ("g3", t.g3),
        ("g4", t.g4),
        ("alpha", p.alpha),
        ("eta", p.eta),
        ("epsilon", p.epsilon),
        ("lambda", p.lambda),
        ("a1", p.prop.a1),
        ("a2", p.prop.a2),
        ("b1", p.prop.b1),
    ];
    writeln!(s, "{:<8} {}", "n", p.n).unwrap();
    for (name, v) in rows {
        writeln!(s, "{name:<8} {}", sig(v)).unwrap();
    }
    writeln!(s, "{:<8} {}", "b2", sig(p.prop.b2)).unwrap();
    writeln!(s, "{:<8} {}", "c", sig(p.c)).unwrap();
    s
}
