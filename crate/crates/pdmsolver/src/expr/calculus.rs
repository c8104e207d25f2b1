//! Symbolic differentiation and light simplification.

use super::{apply_binary, apply_unary, num, BinOp, Expr, UnaryFn};

/// One round of d/dx. Callers are expected to simplify afterwards.
pub(super) fn diff_once(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Param(_) => num(0.0),
        Expr::Var => num(1.0),
        Expr::Unary(f, inner) => {
            let g = inner.as_ref().clone();
            let dg = diff_once(inner);
            match f {
                UnaryFn::Neg => dg.neg(),
                UnaryFn::Exp => g.exp().mul(dg),
                UnaryFn::Ln => dg.div(g),
                UnaryFn::Sqrt => dg.div(num(2.0).mul(g.sqrt())),
                // d|g| = g' * g/|g|; undefined at g = 0 by construction
                UnaryFn::Abs => dg.mul(g.clone().div(Expr::unary(UnaryFn::Abs, g))),
                UnaryFn::Sin => Expr::unary(UnaryFn::Cos, g).mul(dg),
                UnaryFn::Cos => Expr::unary(UnaryFn::Sin, g).mul(dg).neg(),
                UnaryFn::Tan => dg.div(Expr::unary(UnaryFn::Cos, g).pow(num(2.0))),
                UnaryFn::Sinh => Expr::unary(UnaryFn::Cosh, g).mul(dg),
                UnaryFn::Cosh => Expr::unary(UnaryFn::Sinh, g).mul(dg),
                UnaryFn::Tanh => Expr::unary(UnaryFn::Sech, g).pow(num(2.0)).mul(dg),
                UnaryFn::Sech => Expr::unary(UnaryFn::Sech, g.clone())
                    .mul(Expr::unary(UnaryFn::Tanh, g))
                    .mul(dg)
                    .neg(),
            }
        }
        Expr::Binary(op, l, r) => {
            let (f, g) = (l.as_ref().clone(), r.as_ref().clone());
            match op {
                BinOp::Add => diff_once(l).add(diff_once(r)),
                BinOp::Sub => diff_once(l).sub(diff_once(r)),
                BinOp::Mul => diff_once(l).mul(g).add(f.mul(diff_once(r))),
                BinOp::Div => diff_once(l)
                    .mul(g.clone())
                    .sub(f.mul(diff_once(r)))
                    .div(g.pow(num(2.0))),
                BinOp::Pow => match r.as_ref() {
                    // power rule for constant exponents
                    Expr::Num(c) => num(*c).mul(f.pow(num(c - 1.0))).mul(diff_once(l)),
                    _ => {
                        // f^g * (g' ln f + g f'/f)
                        let term = diff_once(r)
                            .mul(f.clone().ln())
                            .add(g.clone().mul(diff_once(l)).div(f.clone()));
                        f.pow(g).mul(term)
                    }
                },
            }
        }
    }
}

pub(super) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Var | Expr::Param(_) => e.clone(),
        Expr::Unary(f, inner) => simp_node(Expr::Unary(*f, Box::new(simplify(inner)))),
        Expr::Binary(op, l, r) => simp_node(Expr::Binary(
            *op,
            Box::new(simplify(l)),
            Box::new(simplify(r)),
        )),
    }
}

fn num_of(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

/// Local rules on a node whose children are already simplified. Rules that
/// build a new composite node re-run themselves so the output is a fixed
/// point.
fn simp_node(e: Expr) -> Expr {
    match e {
        Expr::Unary(f, inner) => {
            // fold constants only when the result is finite; ln(-1) stays
            // symbolic so evaluation reports the domain error
            if let Some(v) = num_of(&inner) {
                if let Ok(folded) = apply_unary(f, v) {
                    return num(folded);
                }
            }
            if f == UnaryFn::Neg {
                if let Expr::Unary(UnaryFn::Neg, e2) = &*inner {
                    return e2.as_ref().clone();
                }
            }
            Expr::Unary(f, inner)
        }
        Expr::Binary(op, l, r) => {
            if let (Some(a), Some(b)) = (num_of(&l), num_of(&r)) {
                if let Ok(folded) = apply_binary(op, a, b) {
                    return num(folded);
                }
            }
            let lv = num_of(&l);
            let rv = num_of(&r);
            match op {
                BinOp::Add => {
                    if lv == Some(0.0) {
                        return *r;
                    }
                    if rv == Some(0.0) {
                        return *l;
                    }
                }
                BinOp::Sub => {
                    if rv == Some(0.0) {
                        return *l;
                    }
                    if lv == Some(0.0) {
                        return simp_node(Expr::Unary(UnaryFn::Neg, r));
                    }
                }
                BinOp::Mul => {
                    if lv == Some(0.0) || rv == Some(0.0) {
                        return num(0.0);
                    }
                    if lv == Some(1.0) {
                        return *r;
                    }
                    if rv == Some(1.0) {
                        return *l;
                    }
                }
                BinOp::Div => {
                    if lv == Some(0.0) && rv != Some(0.0) {
                        return num(0.0);
                    }
                    if rv == Some(1.0) {
                        return *l;
                    }
                }
                BinOp::Pow => {
                    if rv == Some(1.0) {
                        return *l;
                    }
                    if rv == Some(0.0) {
                        return num(1.0);
                    }
                    if lv == Some(1.0) {
                        return num(1.0);
                    }
                }
            }
            Expr::Binary(op, l, r)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, param, var, Params};

    #[test]
    fn derivative_of_square_is_two_x() {
        let d = parse("x^2").unwrap().differentiate(1);
        assert_eq!(d, num(2.0).mul(var()));
    }

    #[test]
    fn derivative_of_sech_squared_matches_identity() {
        // d/dx sech(w x)^2 = -2 w sech(w x)^2 tanh(w x)
        let d = parse("sech(w*x)^2").unwrap().differentiate(1);
        let reference = parse("-2*w*sech(w*x)^2*tanh(w*x)").unwrap();
        let params: Params = [("w".to_string(), 1.3)].into();
        for i in 0..40 {
            let x = -2.0 + 0.1 * i as f64;
            let a = d.eval(x, &params).unwrap();
            let b = reference.eval(x, &params).unwrap();
            assert!(
                (a - b).abs() <= 1e-12 * (1.0 + b.abs()),
                "x={x}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn second_derivative_of_log_mass_against_finite_differences() {
        // d2/dx2 ln(m0 sech^2(w x)) = -2 w^2 sech^2(w x); oracle is a
        // 4th-order central stencil on ln m at scattered points
        let lnm = parse("ln(m0*sech(w*x)^2)").unwrap();
        let d2 = lnm.differentiate(2);
        let closed = parse("-2*w^2*sech(w*x)^2").unwrap();
        let params: Params = [("m0".to_string(), 1.7), ("w".to_string(), 0.9)].into();
        let h = 1e-3;
        let mut state = 0x2545f4914f6cdd1du64;
        for _ in 0..20 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x = (state >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0;
            let f = |t: f64| lnm.eval(t, &params).unwrap();
            // 4th-order second-difference stencil
            let fd = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x)
                + 16.0 * f(x + h)
                - f(x + 2.0 * h))
                / (12.0 * h * h);
            let sym = d2.eval(x, &params).unwrap();
            assert!(
                (sym - fd).abs() <= 1e-6 * (1.0 + sym.abs()),
                "x={x}: sym={sym} fd={fd}"
            );
            let cf = closed.eval(x, &params).unwrap();
            assert!((sym - cf).abs() <= 1e-10 * (1.0 + cf.abs()));
        }
    }

    #[test]
    fn abs_derivative_is_sign_and_errors_at_zero() {
        let d = parse("abs(x)").unwrap().differentiate(1);
        assert_eq!(d.eval(2.0, &Params::new()).unwrap(), 1.0);
        assert_eq!(d.eval(-2.0, &Params::new()).unwrap(), -1.0);
        assert!(d.eval(0.0, &Params::new()).is_err());
    }

    #[test]
    fn third_derivative_of_sin() {
        let d3 = parse("sin(x)").unwrap().differentiate(3);
        for x in [-1.0f64, 0.0, 0.4, 2.0] {
            let want = -x.cos();
            let got = d3.eval(x, &Params::new()).unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn general_power_rule() {
        // d/dx x^x = x^x (ln x + 1)
        let d = parse("x^x").unwrap().differentiate(1);
        for x in [0.5f64, 1.0, 2.0, 3.5] {
            let want = x.powf(x) * (x.ln() + 1.0);
            let got = d.eval(x, &Params::new()).unwrap();
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn simplify_identities() {
        assert_eq!(num(0.0).mul(var()).add(var()).simplify(), var());
        assert_eq!(num(2.0).mul(num(3.0)).simplify(), num(6.0));
        assert_eq!(var().pow(num(1.0)).simplify(), var());
        assert_eq!(var().neg().neg().simplify(), var());
        assert_eq!(var().sub(num(0.0)).simplify(), var());
        assert_eq!(num(0.0).sub(var()).simplify(), var().neg());
        assert_eq!(num(0.0).div(var()).simplify(), num(0.0));
        assert_eq!(var().pow(num(0.0)).simplify(), num(1.0));
    }

    #[test]
    fn simplify_does_not_fold_domain_errors() {
        let e = num(-1.0).ln();
        assert_eq!(e.simplify(), num(-1.0).ln());
        let z = num(1.0).div(num(0.0));
        assert_eq!(z.simplify(), num(1.0).div(num(0.0)));
    }

    #[test]
    fn simplify_preserves_value_of_folded_constants() {
        let e = param("c").mul(num(2.0).mul(num(3.0)));
        let s = e.simplify();
        let params: Params = [("c".to_string(), 0.25)].into();
        assert_eq!(
            e.eval(1.0, &params).unwrap(),
            s.eval(1.0, &params).unwrap()
        );
    }
}
