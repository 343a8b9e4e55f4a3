//! Canonical renderer for the query model. `parse(render(q)) == q` for every
//! query in the subset.

use super::{FilterExpr, GraphPattern, PatTerm, Projection, Query};
use std::fmt::Write;

fn render_pat_term(t: &PatTerm, out: &mut String) {
    match t {
        PatTerm::Var(v) => {
            out.push('?');
            out.push_str(v);
        }
        PatTerm::Const(term) => {
            let _ = write!(out, "{}", term);
        }
    }
}

fn render_group(gp: &GraphPattern, out: &mut String) {
    for p in &gp.required {
        out.push(' ');
        render_pat_term(&p.s, out);
        out.push(' ');
        render_pat_term(&p.p, out);
        out.push(' ');
        render_pat_term(&p.o, out);
        out.push_str(" .");
    }
    if !gp.optional.is_empty() {
        out.push_str(" OPTIONAL {");
        for p in &gp.optional {
            out.push(' ');
            render_pat_term(&p.s, out);
            out.push(' ');
            render_pat_term(&p.p, out);
            out.push(' ');
            render_pat_term(&p.o, out);
            out.push_str(" .");
        }
        out.push_str(" }");
    }
    for f in &gp.filters {
        match f {
            FilterExpr::Compare { var, op, value } => {
                let _ = write!(out, " FILTER(?{} {} {})", var, op.symbol(), value);
            }
            FilterExpr::IsIri { var } => {
                let _ = write!(out, " FILTER(isIRI(?{}))", var);
            }
            FilterExpr::IsLiteral { var } => {
                let _ = write!(out, " FILTER(isLiteral(?{}))", var);
            }
        }
    }
}

pub fn render_query(q: &Query) -> String {
    let mut out = String::from("SELECT ");
    match &q.projection {
        Projection::All => out.push('*'),
        Projection::Vars(vs) => {
            let mut first = true;
            for v in vs {
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push('?');
                out.push_str(v);
            }
        }
    }
    out.push_str(" WHERE {");
    if q.branches.len() == 1 {
        render_group(&q.branches[0], &mut out);
    } else {
        for (i, b) in q.branches.iter().enumerate() {
            if i > 0 {
                out.push_str(" UNION");
            }
            out.push_str(" {");
            render_group(b, &mut out);
            out.push_str(" }");
        }
    }
    out.push_str(" }");
    out
}
