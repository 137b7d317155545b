use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisect_core::format::{self, Diagram, Kind};
use trisect_core::surface::SurfaceComplex;
use trisect_core::{fixtures, moves, trisection};

fn grown(seed: u64, st: usize, slides: usize) -> trisect_core::arrangement::Arrangement {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let base = match seed % 3 {
        0 => fixtures::sphere(),
        1 => fixtures::klein(),
        _ => fixtures::torus_s4(),
    };
    fixtures::grow(&base, st, slides, &mut |n| r.gen_range(0..n))
}

/// Signed label words: each of `n` labels used twice.
fn words() -> impl Strategy<Value = Vec<Vec<String>>> {
    (1usize..6).prop_flat_map(|n| {
        let toks: Vec<usize> = (0..2 * n).map(|i| i / 2).collect();
        (Just(toks).prop_shuffle(), prop::collection::vec(any::<bool>(), 2 * n), 0usize..2 * n).prop_map(|(toks, signs, cut)| {
            let w: Vec<String> = toks.iter().zip(signs).map(|(t, s)| format!("{}e{t}", if s { "-" } else { "" })).collect();
            if cut == 0 {
                vec![w]
            } else {
                vec![w[..cut].to_vec(), w[cut..].to_vec()]
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagram_files_round_trip(seed in 0u64..1000, st in 0usize..3, slides in 0usize..3) {
        let d = Diagram::new(Kind::Trisection, grown(seed, st, slides));
        let text = format::serialize(&d);
        let back = format::parse(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(format::serialize(&back), text);
        prop_assert_eq!(moves::hash(&back), moves::hash(&d));
    }

    #[test]
    fn surface_words_round_trip(w in words()) {
        if let Ok(s) = SurfaceComplex::from_words(&w) {
            let back = SurfaceComplex::from_words(&s.to_words()).unwrap();
            prop_assert_eq!(back.euler_characteristic(), s.euler_characteristic());
            prop_assert_eq!(back.is_orientable(), s.is_orientable());
            prop_assert_eq!(back.components(), s.components());
            let cover = s.orientation_double_cover().cover;
            prop_assert_eq!(cover.euler_characteristic(), 2 * s.euler_characteristic());
            prop_assert!(cover.is_orientable());
        }
    }

    #[test]
    fn homology_agrees_with_abelianized_pi1(seed in 0u64..1000, st in 0usize..3, slides in 0usize..3) {
        let arr = grown(seed, st, slides);
        prop_assert_eq!(trisection::fundamental_group(&arr).abelianization(), trisection::first_homology(&arr));
    }

    #[test]
    fn non_orientable_sectors_are_never_balls(seed in 0u64..1000, st in 0usize..2, slides in 0usize..3) {
        let arr = grown(seed, st, slides);
        let r = trisection::validate(&arr, 20_000).unwrap();
        if let (false, Some(p)) = (arr.surface.is_orientable(), r.params) {
            prop_assert!(p.k.iter().all(|&k| k >= 1), "{:?}", p);
        }
    }
}

#[test]
fn connected_sum_with_the_genus_zero_sphere_is_identity() {
    for arr in [fixtures::klein(), fixtures::torus_s4(), fixtures::rp4(2000).unwrap()] {
        let sum = trisection::connected_sum(&arr, &fixtures::sphere());
        let (a, b) = (trisection::validate(&arr, 20_000).unwrap(), trisection::validate(&sum, 20_000).unwrap());
        assert_eq!(a.params, b.params);
        assert_eq!(trisection::first_homology(&arr), trisection::first_homology(&sum));
    }
}
