mod common;

use std::time::Instant;

use common::*;
use hseg::hierarchy::{
    build_hierarchy, fill_empty_space, filter_small_segments, select_depth_features,
};
use hseg::scalar::Weight;
use hseg::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the hierarchy depth and whether any node had several candidate parents.
fn check_against_oracle(m: &hseg::SegmentManifest, t: f64) -> (usize, bool) {
    let segs: Vec<_> = m.segments().iter().collect();
    let t = BigRational::from_threshold(t).unwrap();
    let h = build_hierarchy(&segs, t.clone()).unwrap();
    let expected = oracle_parents(&segs, &t);
    for (&id, &parent) in &expected {
        assert_eq!(h.parent(id), Some(parent), "segment {id} in {}", m.to_json());
    }
    assert_eq!(h.len(), expected.len());
    // tree property: every node reaches the root through its parents
    for id in h.nodes() {
        let mut steps = 0;
        let mut cur = id;
        while let Some(Some(p)) = h.parent(cur) {
            cur = p;
            steps += 1;
            assert!(steps <= h.len());
        }
        assert_eq!(h.depth(id), Some(steps + 1));
    }
    let segs_by_id: Vec<_> = m.segments().iter().collect();
    let multi = segs_by_id.iter().any(|child| {
        segs_by_id
            .iter()
            .filter(|p| p.id() != child.id())
            .filter(|p| {
                let r: BigRational = hseg::hierarchy::overlap_metric(p, child);
                let back: BigRational = hseg::hierarchy::overlap_metric(child, p);
                r >= t && !(back >= t && (child.pixel_count(), std::cmp::Reverse(child.id())) > (p.pixel_count(), std::cmp::Reverse(p.id())))
            })
            .count()
            > 1
    });
    (h.max_depth(), multi)
}

#[test]
fn matches_brute_force_on_500_manifests() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut deep, mut multi) = (0, 0);
    for i in 0..500 {
        let m = random_manifest(&mut rng, 32, 32, 8);
        let t = [0.9, 0.5, 0.75, 1.0][i % 4];
        let (depth, several) = check_against_oracle(&m, t);
        deep += usize::from(depth >= 3);
        multi += usize::from(several);
    }
    // the generator must exercise nesting and pruning, not just flat sets
    assert!(deep >= 50, "only {deep} manifests nest three deep");
    assert!(multi >= 50, "only {multi} manifests have competing parents");
    assert!(start.elapsed().as_secs_f64() < 10.0, "took {:?}", start.elapsed());
}

#[test]
fn containment_chain_prunes_transitive_edge() {
    let a = rect(1, 16, 16, 0, 0, 16, 16);
    let b = rect(2, 16, 16, 0, 0, 8, 8);
    let c = rect(3, 16, 16, 0, 0, 4, 4);
    let h = build_hierarchy(&[&c, &a, &b], BigRational::from_threshold(0.9).unwrap()).unwrap();
    assert_eq!(h.root_children(), &[1]);
    assert_eq!(h.children(1), &[2]);
    assert_eq!(h.children(2), &[3]);
    assert_eq!(h.max_depth(), 3);
}

#[test]
fn spec_example_tree() {
    // A = 60 px, B = 9 px inside A, C = 40 px disjoint
    let a = rect(0, 20, 20, 0, 0, 6, 10);
    let b = rect(1, 20, 20, 0, 0, 3, 3);
    let c = rect(2, 20, 20, 10, 0, 14, 10);
    let h = build_hierarchy(&[&a, &b, &c], 0.9f64).unwrap();
    assert_eq!(h.root_children(), &[0, 2]);
    assert_eq!(h.children(0), &[1]);
    assert_eq!(select_depth_features(&h, 1, &[]).unwrap(), vec![0, 2]);
    assert_eq!(select_depth_features(&h, 2, &[vec![0]]).unwrap(), vec![1, 2]);
    assert!(select_depth_features(&h, 2, &[vec![2]]).is_err());
}

#[test]
fn fill_matches_nearest_pixel_oracle_on_200_manifests() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let m = random_manifest(&mut rng, 32, 32, 8);
        let img = hseg::ImageBuffer::filled(32, 32, &[1, 2, 3]).unwrap();
        let segs: Vec<_> = m.segments().iter().collect();
        let h = build_hierarchy(&segs, 0.9f64).unwrap();
        let ids = select_depth_features(&h, 1, &[]).unwrap();
        let fs = fill_empty_space(&ids, &m, &img).unwrap();
        let expected = oracle_fill(&ids, &m);
        for (k, &id) in expected.iter().enumerate() {
            assert_eq!(fs.feature_ids()[fs.label(k)], id, "pixel {k} of {}", m.to_json());
        }
    }
}

#[test]
fn theta_boundary() {
    let mut b = rect_bitmap(64, 64, 20, 0, 30, 50);
    b.clear(20 * 64);
    let m = manifest(
        64,
        64,
        vec![
            rect(0, 64, 64, 0, 0, 10, 50),
            hseg::mask_io::SegmentMask::from_bitmap(1, b).unwrap(),
        ],
    );
    assert_eq!(m.segment(0).unwrap().pixel_count(), 500);
    assert_eq!(m.segment(1).unwrap().pixel_count(), 499);
    let kept: Vec<u64> = filter_small_segments(&m, 500).unwrap().iter().map(|s| s.id()).collect();
    assert_eq!(kept, vec![0]);
    assert_eq!(filter_small_segments(&m, 499).unwrap().len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn random_seeds_match_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_manifest(&mut rng, 12, 12, 7);
        check_against_oracle(&m, 0.9);
    }
}
