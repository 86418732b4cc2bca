use ldwpso::space::{canonical_space, Activation, HyperParams, OptimizerKind, ParamKind, KERNEL_SIZES};
use proptest::prelude::*;

prop_compose! {
    fn valid_params()(
        f1 in 4usize..=100, f2 in 4usize..=100,
        k1 in proptest::sample::select(KERNEL_SIZES.to_vec()),
        k2 in proptest::sample::select(KERNEL_SIZES.to_vec()),
        acts in proptest::array::uniform4(proptest::sample::select(Activation::ALL.to_vec())),
        n1 in 4usize..=200, n2 in 4usize..=200,
        batch_size in 10usize..=100,
        optimizer in prop_oneof![Just(OptimizerKind::Adam), Just(OptimizerKind::Sgd)],
    ) -> HyperParams {
        HyperParams {
            filters_c1: f1, filters_c2: f2, kernel_c1: k1, kernel_c2: k2,
            act_c1: acts[0], act_c2: acts[1], act_fc1: acts[2], act_fc2: acts[3],
            neurons_fc1: n1, neurons_fc2: n2, batch_size, optimizer,
        }
    }
}

fn any_coordinate() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -1e3f64..1e3,
        1 => any::<f64>(),
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
    ]
}

/// Expected decode of one coordinate, written out longhand.
fn expected_index(x: f64, low: i64, high: i64) -> i64 {
    if x.is_nan() || x <= low as f64 {
        return low;
    }
    if x >= high as f64 {
        return high;
    }
    let floor = x.floor();
    let frac = x - floor;
    let r = if frac >= 0.5 { floor + 1.0 } else { floor };
    // Half-way points below zero round away from zero as well.
    let r = if x < 0.0 && frac == 0.5 { floor } else { r };
    (r as i64).clamp(low, high)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decode_inverts_encode(p in valid_params()) {
        let space = canonical_space();
        let x = space.encode(&p).unwrap();
        prop_assert_eq!(space.decode(&x).unwrap(), p);
    }

    #[test]
    fn decode_is_total_on_any_vector(x in proptest::collection::vec(any_coordinate(), 12)) {
        let space = canonical_space();
        let p = space.decode(&x).unwrap();
        prop_assert!(p.validate().is_ok());
        let fields = p.fields();
        for (i, spec) in space.params().iter().enumerate() {
            let value = &fields.iter().find(|(n, _)| *n == spec.name).unwrap().1;
            match &spec.kind {
                ParamKind::IntRange { low, high } => {
                    prop_assert_eq!(value, &expected_index(x[i], *low, *high).to_string());
                }
                ParamKind::Categorical(labels) => {
                    let k = expected_index(x[i], 0, labels.len() as i64 - 1) as usize;
                    prop_assert_eq!(value, &labels[k]);
                }
            }
        }
    }

    #[test]
    fn whole_bound_box_decodes_into_the_space(u in proptest::collection::vec(0.0f64..=1.0, 12)) {
        let space = canonical_space();
        let x: Vec<f64> = space.continuous_bounds().iter().zip(&u).map(|(&(lo, hi), t)| lo + t * (hi - lo)).collect();
        prop_assert!(space.decode(&x).unwrap().validate().is_ok());
    }
}

#[test]
fn every_integer_owns_an_equal_slice_of_its_interval() {
    let space = canonical_space();
    let (lo, hi) = space.param("filters_c1").unwrap().continuous_bounds();
    assert_eq!((lo, hi), (3.501, 100.499));
    let samples = 97_000;
    let mut counts = vec![0usize; 97];
    for i in 0..samples {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
        let mut pos = space.encode(&ldwpso::space::baseline_params()).unwrap();
        pos[0] = x;
        counts[space.decode(&pos).unwrap().filters_c1 - 4] += 1;
    }
    let (min, max) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
    assert!(*max as f64 / *min as f64 <= 1.01, "{min}..{max}");
}
