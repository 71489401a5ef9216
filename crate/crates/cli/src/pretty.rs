//! Plain-text rendering of a report bundle.

use std::fmt::Write;

use crate::run::{Check, ReportBundle};

struct Table {
    rows: Vec<[String; 4]>,
}

impl Table {
    fn value(&mut self, section: &str, name: &str, value: impl ToString) {
        self.rows
            .push([section.to_string(), name.to_string(), value.to_string(), String::new()]);
    }

    fn check(&mut self, section: &str, name: &str, c: &Check) {
        let status = if c.pass { "ok" } else { "FAIL" };
        self.rows.push([
            section.to_string(),
            name.to_string(),
            format!("{:.3e}", c.value),
            format!("{status} (tol {:.0e})", c.tol),
        ]);
    }

    fn render(&self) -> String {
        let mut width = [0usize; 4];
        for r in &self.rows {
            for (w, cell) in width.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for r in &self.rows {
            let mut line = String::new();
            for (k, cell) in r.iter().enumerate() {
                let pad = width[k] - cell.chars().count();
                line.push_str(cell);
                line.push_str(&" ".repeat(pad + 2));
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}

fn text(x: &Option<String>) -> String {
    x.clone().unwrap_or_else(|| "-".into())
}

fn opt<T: std::fmt::Debug>(x: &Option<T>) -> String {
    match x {
        Some(v) => format!("{v:?}"),
        None => "-".into(),
    }
}

pub fn table(r: &ReportBundle) -> String {
    let mut t = Table { rows: Vec::new() };
    let i = &r.instance;
    t.value("instance", "label", &i.label);
    t.value("instance", "blocks B / A", format!("{:?} / {:?}", i.sub_blocks, i.sup_blocks));
    t.value("instance", "trace", &i.trace);

    if let Some(x) = &r.index {
        t.value("index", "scalar", opt(&x.scalar));
        t.value("index", "block values", format!("{:?}", x.block_values));
        t.check("index", "reconstruction", &x.reconstruction_left);
        t.check("index", "centrality", &x.centrality);
        t.check("index", "pivot independence", &x.pivot_independence);
        if let Some(c) = &x.expected_agreement {
            t.check("index", "closed form", c);
        }
        t.value("index", "pp constant", format!("{:.9}", x.pp_constant));
        let b = &x.basic_construction;
        t.check("basic", "unit", &b.unit);
        t.check("basic", "Ind E1(e) = 1", &b.markov);
        t.check("basic", "pushdown", &b.pushdown);
        if let Some(c) = &b.commutant_distance {
            t.check("basic", "A1 = (R_B)'", c);
        }
        if let Some(d) = &x.dual {
            t.check("dual", "extension", &d.extension);
            if let Some(c) = &d.dual_index_agreement {
                t.check("dual", "dual index", c);
            }
        }
    }
    if let Some(c) = &r.commutant {
        t.value("commutant", "B' ∩ A", format!("{} {:?}", c.lower_dim, c.lower_blocks));
        t.value("commutant", "B' ∩ A1", format!("{} {}", opt(&c.higher_dim), opt(&c.higher_blocks)));
    }
    if let Some(m) = &r.markov {
        t.value("markov", "Λ", format!("{:?}", m.inclusion_matrix));
        match &m.flagged {
            Some(msg) => t.value("markov", "flagged", msg),
            None => {
                t.value("markov", "alpha", text(&m.alpha_exact));
                t.value("markov", "t", m.t_sup_exact.as_ref().map_or("-".into(), |v| v.join(", ")));
            }
        }
    }
    if let Some(a) = &r.angle {
        for p in &a.pairs {
            t.value("angle", &format!("{} / {}", p.c, p.d), format!("{:.12}", p.angle));
        }
        t.check("angle", "Cauchy-Schwarz", &a.cauchy_schwarz);
    }
    if let Some(ms) = &r.meet {
        for m in ms {
            t.check("meet", &format!("{} / {}", m.c, m.d), &m.difference);
        }
    }
    if let Some(s) = &r.stability {
        t.value("stability", "m", s.m);
        t.check("stability", "index formula", &s.index_formula);
        for p in &s.pairs {
            t.check("stability", &format!("{} / {}", p.c, p.d), &p.difference);
        }
    }
    if let Some(b) = &r.bound {
        t.value("bound", "dim B' ∩ A1 / min n", format!("{} = {}", b.ratio, b.ratio_value));
        t.value("bound", "minimal index", format!("{} ({})", b.minimal_index, b.regime));
        t.value("bound", "9^ceil(ratio)", text(&b.nine_power));
        for l in &b.chain {
            let state = match (&l.skipped, l.holds) {
                (Some(_), _) => "skipped",
                (None, true) => "holds",
                (None, false) => "fails",
            };
            t.value("bound", &l.name, format!("{:.6e} vs {:.6e}: {state} [{}]", l.lhs, l.rhs, l.role));
        }
    }
    if let Some(l) = &r.lattice {
        t.value("lattice", "subgroups", l.count);
        for s in &l.subgroups {
            t.value("lattice", &format!("{:?}", s.elements), format!("blocks {:?}", s.algebra_blocks));
        }
    }
    let verdict = if r.verification.passed { "passed" } else { "FAILED" };
    t.value("verification", "result", verdict);
    t.render()
}
