//! S-expression rendering of terms and formulae, in the problem-file syntax.
//! Printed forms double as atom keys for the base solver.

use std::fmt::Write;

use crate::formula::{DepthRel, DepthRhs, Formula, Quantifier};
use crate::sig::Signature;
use crate::term::Term;

pub fn write_term(sig: &Signature, t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&sig.var(*v).name),
        Term::Param(p) => out.push_str(&sig.param(*p).name),
        Term::App(f, args) if args.is_empty() => out.push_str(&sig.fun(*f).name),
        Term::App(f, args) => {
            out.push('(');
            out.push_str(&sig.fun(*f).name);
            for a in args {
                out.push(' ');
                write_term(sig, a, out);
            }
            out.push(')');
        }
    }
}

pub fn term_to_string(sig: &Signature, t: &Term) -> String {
    let mut s = String::new();
    write_term(sig, t, &mut s);
    s
}

fn write_rhs(sig: &Signature, rhs: DepthRhs, out: &mut String) {
    let n = sig
        .depth_param()
        .map(|p| sig.param(p).name.as_str())
        .unwrap_or("N");
    match rhs {
        DepthRhs::Zero => out.push('0'),
        DepthRhs::N => out.push_str(n),
        DepthRhs::SuccZero => out.push_str("(s 0)"),
        DepthRhs::SuccN => {
            let _ = write!(out, "(s {n})");
        }
    }
}

pub fn write_formula(sig: &Signature, f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Pred {
            pred,
            args,
            positive,
        } => {
            if !positive {
                out.push_str("(not ");
            }
            write_term(sig, &Term::App(*pred, args.clone()), out);
            if !positive {
                out.push(')');
            }
        }
        Formula::Eq(t, s) | Formula::Diseq(t, s) => {
            out.push_str(if matches!(f, Formula::Eq(..)) {
                "(= "
            } else {
                "(/= "
            });
            write_term(sig, t, out);
            out.push(' ');
            write_term(sig, s, out);
            out.push(')');
        }
        Formula::Defined {
            def,
            index,
            positive,
        } => {
            if !positive {
                out.push_str("(not ");
            }
            out.push('(');
            out.push_str(&sig.def(*def).name);
            out.push(' ');
            write_term(sig, index, out);
            out.push(')');
            if !positive {
                out.push(')');
            }
        }
        Formula::Depth { param, rel, rhs } => {
            let op = match rel {
                DepthRel::Eq => "=",
                DepthRel::Lt => "<",
                DepthRel::Le => "<=",
            };
            let _ = write!(out, "({op} (depth {}) ", sig.param(*param).name);
            write_rhs(sig, *rhs, out);
            out.push(')');
        }
        Formula::And(cs) | Formula::Or(cs) => {
            out.push_str(if matches!(f, Formula::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for c in cs {
                out.push(' ');
                write_formula(sig, c, out);
            }
            out.push(')');
        }
        Formula::Quant { q, var, body } => {
            let kw = match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            let v = sig.var(*var);
            let _ = write!(out, "({kw} (({} {})) ", v.name, sig.sort_name(v.sort));
            write_formula(sig, body, out);
            out.push(')');
        }
    }
}

pub fn formula_to_string(sig: &Signature, f: &Formula) -> String {
    let mut s = String::new();
    write_formula(sig, f, &mut s);
    s
}

/// `{f1, f2, ...}` in label order.
pub fn label_to_string<'a>(sig: &Signature, fs: impl IntoIterator<Item = &'a Formula>) -> String {
    let parts: Vec<String> = fs.into_iter().map(|f| formula_to_string(sig, f)).collect();
    format!("{{{}}}", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{FunKind, BOOL, NAT, SUCC};

    #[test]
    fn prints_problem_syntax() {
        let mut sig = Signature::new();
        let p = sig.add_fun("p", vec![NAT], BOOL, FunKind::Base).unwrap();
        let g = sig.add_def("g", NAT).unwrap();
        let a = sig.add_param("A", NAT).unwrap();
        let n = sig.new_depth_param();
        let at = Term::Param(a);
        let f = Formula::and([
            Formula::pred(p, vec![at.clone()], false),
            Formula::defined(g, Term::app(SUCC, vec![at.clone()]), true),
        ]);
        assert_eq!(formula_to_string(&sig, &f), "(and (not (p A)) (g (s A)))");
        let d = Formula::depth(a, DepthRel::Lt, DepthRhs::SuccN);
        assert_eq!(formula_to_string(&sig, &d), "(< (depth A) (s N))");
        let e = Formula::diseq(at, Term::Param(n));
        assert_eq!(formula_to_string(&sig, &e), "(/= A N)");
    }
}
