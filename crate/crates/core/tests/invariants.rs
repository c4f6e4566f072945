use proptest::prelude::*;
use seco_core::backend::resolve_prompt;
use seco_core::components::{connected_components, enlarge_box, mask_iou, Adjacency};
use seco_core::io::{BBox, BitMask, LabelMap, MaskEntry, MaskSet, MaskSource, Point, VOID};
use seco_core::scc::{fit_gmm2_traced, noise_posterior, EmConfig};

const W: u32 = 12;
const H: u32 = 10;

fn label_map() -> impl Strategy<Value = LabelMap> {
    prop::collection::vec(prop_oneof![Just(VOID), 0u8..3], (W * H) as usize)
        .prop_map(|data| LabelMap::new(W, H, data).unwrap())
}

fn bit_mask() -> impl Strategy<Value = BitMask> {
    prop::collection::vec(any::<bool>(), (W * H) as usize).prop_map(|bits| BitMask::from_bits(W, H, bits).unwrap())
}

fn bbox() -> impl Strategy<Value = BBox> {
    (0..W, 0..H, 0..W, 0..H).prop_map(|(a, b, c, d)| BBox::new(a.min(c), b.min(d), a.max(c), b.max(d)))
}

proptest! {
    #[test]
    fn components_partition_the_labeled_pixels(map in label_map(), four in any::<bool>()) {
        let adj = if four { Adjacency::Four } else { Adjacency::Eight };
        let comps = connected_components(&map, adj, None);
        let mut seen = BitMask::new(W, H);
        for c in &comps {
            let m = c.mask.decode().unwrap();
            prop_assert_eq!(seen.intersection_count(&m), 0);
            prop_assert!(m.ones().all(|(x, y)| map.get(x, y) == c.class));
            prop_assert!(c.bbox.contains_point(c.anchor) && m.contains(c.centroid));
            seen.union_with(&m);
        }
        let labeled = map.data().iter().filter(|&&v| v != VOID).count() as u64;
        prop_assert_eq!(seen.area(), labeled);
        // eight-adjacency never yields more components than four
        if four {
            prop_assert!(connected_components(&map, Adjacency::Eight, None).len() <= comps.len());
        }
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in bit_mask(), b in bit_mask()) {
        let (ea, eb) = (a.encode(), b.encode());
        let ab = mask_iou(&ea, &eb).unwrap();
        prop_assert_eq!(ab, mask_iou(&eb, &ea).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        if !a.is_empty() {
            prop_assert_eq!(mask_iou(&ea, &ea).unwrap(), 1.0);
        }
    }

    #[test]
    fn enlarged_boxes_nest(b in bbox(), f1 in 1.0f64..4.0, extra in 0.0f64..4.0) {
        let small = enlarge_box(&b, f1, (W, H));
        let large = enlarge_box(&b, f1 + extra, (W, H));
        prop_assert!(small.contains_box(&b));
        prop_assert!(large.contains_box(&small));
        prop_assert!(large.fits(W, H));
    }

    #[test]
    fn prompt_resolution_ignores_pool_order(
        masks in prop::collection::vec(bit_mask(), 1..6),
        b in bbox(),
        px in 0..W,
        py in 0..H,
        rotate in 0usize..6,
    ) {
        let entries: Vec<MaskEntry> = masks
            .iter()
            .enumerate()
            .map(|(i, m)| MaskEntry { id: i as u32 * 3 + 1, rle: m.encode(), source: MaskSource::Auto })
            .collect();
        let mut shuffled = entries.clone();
        shuffled.rotate_left(rotate % entries.len());
        shuffled.reverse();
        let set = |masks| MaskSet { image_id: "p".into(), width: W, height: H, masks };
        let p = Point::new(px, py);
        prop_assert_eq!(resolve_prompt(&set(entries), &b, p).unwrap(), resolve_prompt(&set(shuffled), &b, p).unwrap());
    }

    #[test]
    fn prompt_prefers_the_exact_box(others in prop::collection::vec(bit_mask(), 0..4), b in bbox()) {
        let exact = BitMask::from_box(W, H, &b);
        let mut masks: Vec<MaskEntry> = others
            .iter()
            .enumerate()
            .map(|(i, m)| MaskEntry { id: i as u32, rle: m.encode(), source: MaskSource::Auto })
            .collect();
        masks.push(MaskEntry { id: 99, rle: exact.encode(), source: MaskSource::Prompt });
        let set = MaskSet { image_id: "p".into(), width: W, height: H, masks };
        let center = Point::new((b.x0 + b.x1) / 2, (b.y0 + b.y1) / 2);
        let got = resolve_prompt(&set, &b, center).unwrap();
        // a different mask can tie only by being identical
        prop_assert_eq!(got, exact.encode());
    }

    #[test]
    fn em_never_lowers_the_likelihood(samples in prop::collection::vec(-5.0f64..5.0, 8..200)) {
        let (fit, trace) = fit_gmm2_traced(&samples, EmConfig::default()).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
        prop_assert!(fit.low.mean <= fit.high.mean);
        prop_assert!((fit.low.weight + fit.high.weight - 1.0).abs() < 1e-9);
        for x in &samples {
            let eta = noise_posterior(&fit, *x);
            prop_assert!((0.0..=1.0).contains(&eta));
        }
    }
}

#[test]
fn posterior_rises_with_loss_on_fitted_models() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let spread = rng.random_range(0.05..0.5);
        let samples: Vec<f64> =
            (0..400).map(|i| if i % 4 == 0 { 2.0 } else { 0.2 } + rng.random_range(-spread..spread)).collect();
        let (fit, _) = fit_gmm2_traced(&samples, EmConfig::default()).unwrap();
        let (lo, hi) = samples.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        // between the means the density ratio is monotone for any variances
        let (from, to) = (fit.low.mean.max(lo), fit.high.mean.min(hi));
        let mut prev = noise_posterior(&fit, from);
        for k in 1..=200 {
            let eta = noise_posterior(&fit, from + (to - from) * k as f64 / 200.0);
            assert!(eta >= prev - 1e-12, "{fit:?}");
            prev = eta;
        }
    }
}
