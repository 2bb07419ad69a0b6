use gitstrata::exactgeom::{hull_certificate, min_norm_oracle, min_norm_point, HullCertificate, HullPosition};
use gitstrata::rational::{int, rat, Rational};
use gitstrata::{InnerProduct, QVector};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=5).prop_map(|(p, q)| rat(p, q))
}

fn points(max_d: usize, max_n: usize) -> impl Strategy<Value = Vec<QVector>> {
    (1..=max_d).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec(rational(), d).prop_map(QVector::new), 1..=max_n)
    })
}

fn diagonal_gram(d: usize) -> impl Strategy<Value = InnerProduct> {
    prop::collection::vec((1i64..=4, 1i64..=3), d).prop_map(move |diag| {
        let gram = (0..d)
            .map(|i| (0..d).map(|j| if i == j { rat(diag[i].0, diag[i].1) } else { int(0) }).collect())
            .collect();
        InnerProduct::new(gram).unwrap()
    })
}

fn reconstructs(points: &[QVector], coeffs: &[Rational], target: &QVector) -> bool {
    let sum: Rational = coeffs.iter().sum();
    let d = target.dim();
    sum.is_one()
        && coeffs.iter().all(|c| *c >= Rational::zero())
        && (0..d).all(|k| {
            let s: Rational = coeffs.iter().zip(points).map(|(c, p)| c * &p.coords()[k]).sum();
            s == target.coords()[k]
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_norm_agrees_with_face_enumeration(pts in points(4, 8)) {
        let ip = InnerProduct::identity(pts[0].dim());
        prop_assert_eq!(min_norm_point(&pts, &ip).unwrap(), min_norm_oracle(&pts, &ip).unwrap());
    }

    #[test]
    fn min_norm_agrees_under_diagonal_gram((pts, ip) in points(3, 6).prop_flat_map(|p| {
        let d = p[0].dim();
        (Just(p), diagonal_gram(d))
    })) {
        prop_assert_eq!(min_norm_point(&pts, &ip).unwrap(), min_norm_oracle(&pts, &ip).unwrap());
    }

    // x is the minimizer iff x is in the hull and <x, p - x> >= 0 for every p.
    #[test]
    fn min_norm_satisfies_variational_inequality(pts in points(3, 7)) {
        let ip = InnerProduct::identity(pts[0].dim());
        let x = min_norm_point(&pts, &ip).unwrap();
        let (pos, _) = hull_certificate(&pts, &x, &ip).unwrap();
        prop_assert_ne!(pos, HullPosition::Outside);
        for p in &pts {
            prop_assert!(ip.dot(&x, &p.sub(&x)).unwrap() >= Rational::zero());
        }
    }

    #[test]
    fn certificates_are_sound(pts in points(3, 6), seed in 0usize..6) {
        let ip = InnerProduct::identity(pts[0].dim());
        let query = if seed < pts.len() { pts[seed].scale(&rat(1, 2)) } else { QVector::zero(pts[0].dim()) };
        let (pos, cert) = hull_certificate(&pts, &query, &ip).unwrap();
        match cert {
            HullCertificate::Barycentric(c) => {
                prop_assert_ne!(pos, HullPosition::Outside);
                prop_assert!(reconstructs(&pts, &c, &query));
                if pos == HullPosition::Interior {
                    prop_assert!(c.iter().all(|x| *x > Rational::zero()));
                }
            }
            HullCertificate::Separating(f) => {
                prop_assert_eq!(pos, HullPosition::Outside);
                for p in &pts {
                    prop_assert!(f.pairing(&p.sub(&query)) > Rational::zero());
                }
            }
        }
    }
}

#[test]
fn segment_examples() {
    let pts = vec![QVector::from_ints(&[-1]), QVector::from_ints(&[1])];
    let ip = InnerProduct::identity(1);
    let zero = QVector::zero(1);
    assert_eq!(min_norm_point(&pts, &ip).unwrap(), zero);
    let (pos, cert) = hull_certificate(&pts, &zero, &ip).unwrap();
    assert_eq!(pos, HullPosition::Interior);
    assert_eq!(cert, HullCertificate::Barycentric(vec![rat(1, 2), rat(1, 2)]));
    let (pos, cert) = hull_certificate(&pts[1..], &zero, &ip).unwrap();
    assert_eq!(pos, HullPosition::Outside);
    let HullCertificate::Separating(f) = cert else { panic!("expected a functional") };
    assert!(f.coords()[0] > Rational::zero());
}
