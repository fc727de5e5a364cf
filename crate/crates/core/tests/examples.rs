//! Identities of the built-in examples, checked end to end.

use kslie::expr::{Expr, ZeroTest};
use kslie::geom::{interior_product, lie_bracket, VectorField};
use kslie::ksymp::{
    bracket_omega, bracket_theta, check_hamiltonian, contract_theta, omega_hamiltonian_field_is_unique, Covector,
    KsympError,
};
use kslie::liealg::{assess_stability, format_rational, lie_closure, structure_constants};
use kslie::prolong::{prolong_field, prolong_function, prolong_two_form};
use kslie::registry::{example, examples, IDS};

fn probes(k: usize) -> Vec<Covector> {
    let mut out: Vec<Covector> = (0..k.min(2)).map(|i| Covector::basis(k, i)).collect();
    out.push(Covector::new(vec![1.0; k]).unwrap());
    out
}

#[test]
fn structure_constants_match_exactly() {
    let mut zt = ZeroTest::new(100);
    for rec in examples().unwrap() {
        let model = structure_constants(rec.fields(), &mut zt).unwrap();
        let r = model.dim();
        for a in 0..r {
            for b in 0..r {
                for g in 0..r {
                    assert_eq!(
                        model.constant(a, b, g),
                        rec.expected_constant(a, b, g),
                        "{}: c^{}_{}{} = {}",
                        rec.id(),
                        g + 1,
                        a + 1,
                        b + 1,
                        format_rational(model.constant(a, b, g))
                    );
                }
            }
        }
        assert!(model.jacobi_holds());
    }
}

#[test]
fn jacobi_on_fields() {
    let mut zt = ZeroTest::new(101);
    for rec in examples().unwrap() {
        let f = rec.fields();
        let r = f.len();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let t1 = lie_bracket(&f[i], &lie_bracket(&f[j], &f[k]).unwrap()).unwrap();
                    let t2 = lie_bracket(&f[j], &lie_bracket(&f[k], &f[i]).unwrap()).unwrap();
                    let t3 = lie_bracket(&f[k], &lie_bracket(&f[i], &f[j]).unwrap()).unwrap();
                    let s = t1.add(&t2).unwrap().add(&t3).unwrap();
                    assert!(s.is_zero(&mut zt).unwrap(), "{}", rec.id());
                }
            }
        }
    }
}

#[test]
fn control_generators_close_in_five_dimensions() {
    let mut zt = ZeroTest::new(102);
    for id in ["control1", "control2"] {
        let rec = example(id).unwrap();
        let model = lie_closure(&rec.fields()[..2], 16, &mut zt).unwrap();
        assert_eq!(model.dim(), 5, "{id}");
    }
}

#[test]
fn every_structure_is_valid() {
    let mut zt = ZeroTest::new(103);
    for rec in examples().unwrap() {
        let s = rec.structure(100, &mut zt).unwrap();
        assert!(s.report().is_valid());
        assert_eq!(s.report().min_rank, rec.chart().dim());
        let n = rec.chart().dim();
        assert_eq!(
            s.report().dimension_warning.is_some(),
            n % (rec.k() + 1) != 0,
            "{}",
            rec.id()
        );
    }
}

#[test]
fn kernels_are_stable() {
    let mut zt = ZeroTest::new(104);
    let mut checked = 0;
    for rec in examples().unwrap() {
        for i in 0..rec.k() {
            let ker = rec.kernel(i);
            if ker.is_empty() {
                continue;
            }
            let r = assess_stability(rec.fields(), ker, &mut zt).unwrap();
            assert!(r.stable, "{} form {}", rec.id(), i + 1);
            for x in rec.fields() {
                for z in ker {
                    let br = lie_bracket(x, z).unwrap();
                    assert!(interior_product(&br, &rec.forms()[i])
                        .unwrap()
                        .is_zero(&mut zt)
                        .unwrap());
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn sl2_bracket_tables() {
    let mut zt = ZeroTest::new(105);
    for id in ["schwarz3ks", "riccati4"] {
        let rec = example(id).unwrap();
        let s = rec.structure(50, &mut zt).unwrap();
        assert_eq!(rec.bracket_table().len(), 3);
        for (a, b, c, g) in rec.bracket_table() {
            let h = rec.omega_hamiltonian(*a);
            let k = rec.omega_hamiltonian(*b);
            let br = bracket_omega(&s, &h, &k, &rec.fields()[*a], &rec.fields()[*b], &mut zt).unwrap();
            let want = rec.omega_hamiltonian(*g).scale(c);
            assert!(
                br.sub(&want).unwrap().is_zero(rec.chart(), &mut zt).unwrap(),
                "{id} {{h{},h{}}}",
                a + 1,
                b + 1
            );
            // the cached field is Hamiltonian for the bracket
            let field = br.field().unwrap();
            assert!(kslie::ksymp::check_omega_hamiltonian(field, &s, &br, &mut zt).unwrap());
        }
        let h = rec.omega_hamiltonian(0);
        let x = &rec.fields()[0];
        let zero = bracket_omega(&s, &h, &h, x, x, &mut zt).unwrap();
        assert!(zero.is_zero(rec.chart(), &mut zt).unwrap());
    }
}

#[test]
fn theta_brackets_are_poisson() {
    let mut zt = ZeroTest::new(106);
    for rec in examples().unwrap() {
        let s = rec.structure(20, &mut zt).unwrap();
        let dom = rec.chart().sampling_domain().clone();
        let r = rec.fields().len();
        for theta in probes(rec.k()) {
            let w = contract_theta(&s, &theta).unwrap();
            let hs: Vec<Expr> = (0..r)
                .map(|a| rec.omega_hamiltonian(a).contract(&theta).unwrap())
                .collect();
            for a in 0..r {
                assert!(check_hamiltonian(&rec.fields()[a], &w, &hs[a], &mut zt).unwrap());
            }
            for a in 0..r {
                for b in 0..r {
                    let (xa, xb) = (&rec.fields()[a], &rec.fields()[b]);
                    // antisymmetry
                    let ab = bracket_theta(&hs[a], xb);
                    let ba = bracket_theta(&hs[b], xa);
                    assert!(zt.is_zero(&(&ab + &ba), &dom).unwrap(), "{} antisymmetry", rec.id());
                    // morphism: contraction of the Omega bracket is the theta bracket
                    let om = bracket_omega(
                        &s,
                        &rec.omega_hamiltonian(a),
                        &rec.omega_hamiltonian(b),
                        xa,
                        xb,
                        &mut zt,
                    )
                    .unwrap()
                    .contract(&theta)
                    .unwrap();
                    assert!(zt.is_zero(&(&om - &ab), &dom).unwrap());
                    // Leibniz in the first slot
                    for c in 0..r {
                        let xc = &rec.fields()[c];
                        let lhs = bracket_theta(&(&hs[a] * &hs[b]), xc);
                        let rhs = &hs[a] * bracket_theta(&hs[b], xc) + &hs[b] * bracket_theta(&hs[a], xc);
                        assert!(zt.is_zero(&(&lhs - &rhs), &dom).unwrap());
                        // Jacobi; the field of {h_b, h_c} is [X_c, X_b]
                        let x_bc = lie_bracket(xc, xb).unwrap();
                        let x_ca = lie_bracket(xa, xc).unwrap();
                        let x_ab = lie_bracket(xb, xa).unwrap();
                        let j =
                            bracket_theta(&hs[a], &x_bc) + bracket_theta(&hs[b], &x_ca) + bracket_theta(&hs[c], &x_ab);
                        assert!(zt.is_zero(&j, &dom).unwrap(), "{} Jacobi", rec.id());
                    }
                }
            }
            let zero = VectorField::zero(rec.chart());
            assert!(bracket_theta(&hs[0], &zero).is_const_zero());
            assert!(bracket_theta(&Expr::int(3), &rec.fields()[0]).is_const_zero());
        }
    }
}

#[test]
fn hamiltonian_fields_are_unique() {
    let mut zt = ZeroTest::new(107);
    let rec = example("schwarz3ks").unwrap();
    let s = rec.structure(50, &mut zt).unwrap();
    let h = rec.omega_hamiltonian(0);
    let y1 = &rec.fields()[0];
    assert!(omega_hamiltonian_field_is_unique(&s, y1, y1, &h, &mut zt).unwrap());
    let shifted = y1.add(&rec.kernel(0)[0].scale(&Expr::rational(1, 10))).unwrap();
    assert!(matches!(
        omega_hamiltonian_field_is_unique(&s, y1, &shifted, &h, &mut zt),
        Err(KsympError::PreconditionFailed(_))
    ));
    let rs = example("diffusion-rs").unwrap();
    let s = rs.structure(50, &mut zt).unwrap();
    let x3 = &rs.fields()[2];
    assert!(omega_hamiltonian_field_is_unique(&s, x3, x3, &rs.omega_hamiltonian(2), &mut zt).unwrap());
}

#[test]
fn prolongation_preserves_the_examples() {
    let mut zt = ZeroTest::new(108);
    for id in IDS {
        let rec = example(id).unwrap();
        let pc = rec.product_chart(2).unwrap();
        let f = rec.fields();
        let pf: Vec<VectorField> = f.iter().map(|x| prolong_field(&pc, x).unwrap()).collect();
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                let lhs = lie_bracket(&pf[i], &pf[j]).unwrap();
                let rhs = prolong_field(&pc, &lie_bracket(&f[i], &f[j]).unwrap()).unwrap();
                assert!(lhs.equals(&rhs, &mut zt).unwrap(), "{id}");
            }
        }
        for (k, w) in rec.forms().iter().enumerate() {
            let pw = prolong_two_form(&pc, w).unwrap();
            for a in 0..f.len() {
                let ph = prolong_function(&pc, rec.hamiltonian(a, k));
                assert!(
                    check_hamiltonian(&pf[a], &pw, &ph, &mut zt).unwrap(),
                    "{id} X{} w{}",
                    a + 1,
                    k + 1
                );
            }
        }
    }
}

#[test]
fn default_integrations_conserve_invariants() {
    use kslie::motion::{check_constant, integrate, DEFAULT_STEP};
    for rec in examples().unwrap() {
        let ics = rec.initial_conditions();
        if ics.is_empty() {
            continue;
        }
        let m = ics.len();
        let base = rec.system(&[]).unwrap();
        let (sys, x0) = if m == 1 {
            (base, ics[0].clone())
        } else {
            let pc = rec.product_chart(m).unwrap();
            let parts: Vec<&[f64]> = ics.iter().map(|x| x.as_slice()).collect();
            (base.prolong(&pc).unwrap(), pc.join(&parts).unwrap())
        };
        let traj = integrate(&sys, &x0, 0.0, 1.0, DEFAULT_STEP).unwrap();
        let invs = rec.invariants().unwrap();
        assert!(!invs.is_empty());
        for inv in invs.iter().filter(|i| i.copies == m) {
            let d = check_constant(&inv.label, &inv.expr, &traj, 1e-6).unwrap();
            assert!(d.pass, "{} {}: {:e}", rec.id(), inv.label, d.max_rel);
        }
    }
}
