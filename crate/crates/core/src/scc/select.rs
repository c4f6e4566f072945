use crate::error::{Error, Result};
use crate::io::{Connectivity, LabelMap, Partition, Provenance, RefinedSet, Thresholds};

/// Partition decision for one connectivity.
pub fn classify(eta: f64, max_prob: f64, t: Thresholds) -> Partition {
    if eta < t.tau_ns {
        Partition::Clean
    } else if max_prob > t.tau_cr {
        Partition::Corrected
    } else {
        Partition::Dropped
    }
}

/// Keeps low-noise connectivities, relabels confident noisy ones to the
/// classifier's top class and drops the rest.
pub fn select_and_correct(conns: Vec<Connectivity>, thresholds: Thresholds) -> Result<RefinedSet> {
    let mut set = RefinedSet { clean: Vec::new(), corrected: Vec::new(), dropped: Vec::new(), thresholds };
    for mut c in conns {
        let (eta, (top, p)) = match (c.eta, c.loss, c.top_class()) {
            (Some(eta), Some(_), Some(top)) => (eta, top),
            _ => return Err(Error::MissingStatistics(c.id)),
        };
        match classify(eta, p, thresholds) {
            Partition::Clean => set.clean.push(c),
            Partition::Corrected => {
                c.prior_label = Some(c.label);
                c.label = top;
                c.provenance = Provenance::Corrected;
                set.corrected.push(c);
            }
            Partition::Dropped => set.dropped.push(c),
        }
    }
    Ok(set)
}

/// Paints the kept and corrected connectivities; where they overlap the
/// higher top-class probability wins, then the lower id. Unpainted pixels
/// are void.
pub fn render_pseudo_label(refined: &RefinedSet, (width, height): (u32, u32)) -> Result<LabelMap> {
    let mut order: Vec<&Connectivity> = refined.all().collect();
    let key = |c: &Connectivity| c.top_class().map_or(0.0, |(_, p)| p);
    // paint weakest first so the strongest claim on a pixel lands last
    order.sort_by(|a, b| key(a).total_cmp(&key(b)).then(b.id.cmp(&a.id)));
    let mut out = LabelMap::void(width, height);
    let h = height as u64;
    for c in order {
        if c.mask.dims() != (width, height) {
            return Err(Error::DimMismatch { expected: (width, height), actual: c.mask.dims() });
        }
        for (start, end) in c.mask.one_runs() {
            for s in start..end {
                out.set((s / h) as u32, (s % h) as u32, c.label);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{BBox, BitMask, VOID};

    fn conn(id: u32, label: u8, eta: f64, probs: Vec<f64>, b: BBox) -> Connectivity {
        let mut c = Connectivity::new(id, &BitMask::from_box(8, 8, &b), label, Provenance::StuffAlign).unwrap();
        c.eta = Some(eta);
        c.loss = Some(0.1);
        c.probs = Some(probs);
        c
    }

    fn probs(k: usize, top: usize, p: f64) -> Vec<f64> {
        let rest = (1.0 - p) / (k - 1) as f64;
        (0..k).map(|i| if i == top { p } else { rest }).collect()
    }

    const T: Thresholds = Thresholds { tau_ns: 0.60, tau_cr: 0.95 };

    #[test]
    fn low_eta_is_clean() {
        let set = select_and_correct(vec![conn(0, 1, 0.30, probs(4, 2, 0.99), BBox::new(0, 0, 1, 1))], T).unwrap();
        assert_eq!(set.clean.len(), 1);
        assert_eq!(set.clean[0].label, 1);
    }

    #[test]
    fn confident_noisy_is_corrected() {
        let set = select_and_correct(vec![conn(0, 1, 0.70, probs(4, 3, 0.97), BBox::new(0, 0, 1, 1))], T).unwrap();
        let c = &set.corrected[0];
        assert_eq!((c.label, c.prior_label, c.provenance), (3, Some(1), Provenance::Corrected));
    }

    #[test]
    fn unsure_noisy_is_dropped() {
        let set = select_and_correct(vec![conn(0, 1, 0.70, probs(4, 3, 0.90), BBox::new(0, 0, 1, 1))], T).unwrap();
        assert_eq!(set.dropped.len(), 1);
        assert_eq!(set.all().count(), 0);
    }

    #[test]
    fn boundaries() {
        assert_eq!(classify(0.60, 0.99, T), Partition::Corrected);
        assert_eq!(classify(0.5999, 0.10, T), Partition::Clean);
        assert_eq!(classify(0.60, 0.95, T), Partition::Dropped);
    }

    #[test]
    fn missing_statistics() {
        let mut c = conn(4, 0, 0.1, probs(2, 0, 0.9), BBox::new(0, 0, 0, 0));
        c.eta = None;
        assert!(matches!(select_and_correct(vec![c], T), Err(Error::MissingStatistics(4))));
    }

    #[test]
    fn render_single_and_disjoint() {
        let a = conn(0, 2, 0.1, probs(3, 2, 0.8), BBox::new(0, 0, 1, 1));
        let b = conn(1, 1, 0.1, probs(3, 1, 0.8), BBox::new(5, 5, 7, 6));
        let set = select_and_correct(vec![a], T).unwrap();
        let m = render_pseudo_label(&set, (8, 8)).unwrap();
        assert_eq!(m.data().iter().filter(|&&v| v == 2).count(), 4);
        assert_eq!(m.data().iter().filter(|&&v| v == VOID).count(), 60);
        let set = select_and_correct(vec![conn(0, 2, 0.1, probs(3, 2, 0.8), BBox::new(0, 0, 1, 1)), b], T).unwrap();
        let m = render_pseudo_label(&set, (8, 8)).unwrap();
        assert_eq!(m.get(6, 6), 1);
        assert_eq!(m.get(1, 1), 2);
        assert_eq!(m.coverage(), 10.0 / 64.0);
    }

    #[test]
    fn render_overlap_prefers_confidence() {
        let strong = conn(5, 1, 0.1, probs(3, 1, 0.99), BBox::new(0, 0, 3, 3));
        let weak = conn(2, 2, 0.1, probs(3, 2, 0.97), BBox::new(2, 2, 5, 5));
        for pair in [vec![strong.clone(), weak.clone()], vec![weak, strong]] {
            let m = render_pseudo_label(&select_and_correct(pair, T).unwrap(), (8, 8)).unwrap();
            assert_eq!(m.get(3, 3), 1);
            assert_eq!(m.get(4, 4), 2);
        }
        // equal confidence: lower id wins
        let a = conn(7, 1, 0.1, probs(3, 1, 0.9), BBox::new(0, 0, 3, 3));
        let b = conn(3, 2, 0.1, probs(3, 2, 0.9), BBox::new(2, 2, 5, 5));
        let m = render_pseudo_label(&select_and_correct(vec![a, b], T).unwrap(), (8, 8)).unwrap();
        assert_eq!(m.get(3, 3), 2);
    }
}
