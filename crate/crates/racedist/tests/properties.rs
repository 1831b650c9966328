//! Property tests pinning the engines to independent oracles: a memoized
//! top-down evaluation of the distance recursion, exhaustive enumeration of
//! alignment paths on small instances, and the LCS identity. The lattice is
//! then pinned to the exact engine: arrivals are the encoded distances plus
//! counted flip-flop offsets, at every tile length.

use proptest::prelude::*;

use racedist::aligner::random_reference;
use racedist::lattice::{build_lattice, counter_width, LatticeConfig};
use racedist::oracle::{backtrack, full_matrix, lv_distance, nw_distance, sw_distance};
use racedist::penalty::{encode_penalties, EncodingParams, GapPenalties};
use racedist::seq::PackedSequence;
use racedist::{Mode, PackedSequence as Seq};

const INF: i64 = i64::MAX / 4;

/// Top-down memoized evaluation of the recurrence, independent of the
/// bottom-up engine implementation.
fn memo_distance(q: &[u8], r: &[u8], gp: &GapPenalties) -> i64 {
    fn go(i: usize, j: usize, q: &[u8], r: &[u8], gp: &GapPenalties, memo: &mut Vec<i64>) -> i64 {
        let cols = r.len() + 1;
        if memo[i * cols + j] != INF {
            return memo[i * cols + j];
        }
        let v = if i == 0 && j == 0 {
            0
        } else {
            let mut best = INF;
            if i > 0 {
                best = best.min(go(i - 1, j, q, r, gp, memo) + gp.delete_cost);
            }
            if j > 0 {
                best = best.min(go(i, j - 1, q, r, gp, memo) + gp.insert_cost);
            }
            if i > 0 && j > 0 {
                let step = if q[i - 1] == r[j - 1] {
                    gp.match_cost
                } else {
                    gp.mismatch_cost
                };
                best = best.min(go(i - 1, j - 1, q, r, gp, memo) + step);
            }
            best
        };
        memo[i * cols + j] = v;
        v
    }
    let mut memo = vec![INF; (q.len() + 1) * (r.len() + 1)];
    go(q.len(), r.len(), q, r, gp, &mut memo)
}

/// Exhaustive minimum over every monotone alignment path. Exponential; only
/// for tiny instances.
fn enumerate_distance(q: &[u8], r: &[u8], gp: &GapPenalties) -> i64 {
    fn go(i: usize, j: usize, q: &[u8], r: &[u8], gp: &GapPenalties) -> i64 {
        if i == q.len() && j == r.len() {
            return 0;
        }
        let mut best = INF;
        if i < q.len() {
            best = best.min(go(i + 1, j, q, r, gp) + gp.delete_cost);
        }
        if j < r.len() {
            best = best.min(go(i, j + 1, q, r, gp) + gp.insert_cost);
        }
        if i < q.len() && j < r.len() {
            let step = if q[i] == r[j] {
                gp.match_cost
            } else {
                gp.mismatch_cost
            };
            best = best.min(go(i + 1, j + 1, q, r, gp) + step);
        }
        best
    }
    go(0, 0, q, r, gp)
}

/// Longest common subsequence, max-based; a different recurrence family
/// from the distance engines.
fn lcs_len(a: &[u8], b: &[u8]) -> usize {
    let cols = b.len() + 1;
    let mut dp = vec![0usize; (a.len() + 1) * cols];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            dp[i * cols + j] = if a[i - 1] == b[j - 1] {
                dp[(i - 1) * cols + j - 1] + 1
            } else {
                dp[(i - 1) * cols + j].max(dp[i * cols + j - 1])
            };
        }
    }
    dp[a.len() * cols + b.len()]
}

fn codes_strategy(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..4, 1..=max_len)
}

fn penalties_strategy() -> impl Strategy<Value = GapPenalties> {
    (0i64..3, 0i64..5, 0i64..5, 0i64..5).prop_map(|(m, x, i, d)| {
        GapPenalties::new(m, m + x, m + i, m + d)
    })
}

fn to_seq(codes: &[u8]) -> Seq {
    PackedSequence::from_codes(codes).unwrap()
}

proptest! {
    #[test]
    fn matrix_matches_memoized_recursion(
        q in codes_strategy(12),
        r in codes_strategy(12),
        gp in penalties_strategy(),
    ) {
        let m = full_matrix(&to_seq(&q), &to_seq(&r), &gp);
        prop_assert_eq!(m.get(q.len(), r.len()), memo_distance(&q, &r, &gp));
    }

    #[test]
    fn matrix_matches_path_enumeration_on_tiny_instances(
        q in codes_strategy(6),
        r in codes_strategy(6),
        gp in penalties_strategy(),
    ) {
        let nw = nw_distance(&to_seq(&q), &to_seq(&r), &gp);
        prop_assert_eq!(nw, enumerate_distance(&q, &r, &gp));
    }

    #[test]
    fn lcs_identity_for_double_indel_substitution(
        q in codes_strategy(20),
        r in codes_strategy(20),
    ) {
        // With match 0, unit indels, and substitution 2, the distance
        // collapses to |q| + |r| - 2 * LCS.
        let gp = GapPenalties::canonical();
        let nw = nw_distance(&to_seq(&q), &to_seq(&r), &gp);
        let expected = (q.len() + r.len()) as i64 - 2 * lcs_len(&q, &r) as i64;
        prop_assert_eq!(nw, expected);
    }

    #[test]
    fn transposition_symmetry_with_equal_indels(
        q in codes_strategy(16),
        r in codes_strategy(16),
        gp in penalties_strategy(),
    ) {
        let gp = GapPenalties::new(gp.match_cost, gp.mismatch_cost, gp.insert_cost, gp.insert_cost);
        let a = nw_distance(&to_seq(&q), &to_seq(&r), &gp);
        let b = nw_distance(&to_seq(&r), &to_seq(&q), &gp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lv_agrees_with_global_distance(
        q in codes_strategy(20),
        r in codes_strategy(20),
        gp in penalties_strategy(),
        cap in 0i64..40,
    ) {
        let (q, r) = (to_seq(&q), to_seq(&r));
        let nw = nw_distance(&q, &r, &gp);
        prop_assert_eq!(lv_distance(&q, &r, &gp, INF), nw);
        let capped = lv_distance(&q, &r, &gp, cap);
        prop_assert!(capped <= cap.max(0));
        if nw <= cap {
            prop_assert_eq!(capped, nw);
        } else {
            prop_assert_eq!(capped, cap);
        }
    }

    #[test]
    fn backtrack_replays_to_endpoint_score(
        q in codes_strategy(14),
        r in codes_strategy(14),
        gp in penalties_strategy(),
        sw_mode in any::<bool>(),
    ) {
        let m = full_matrix(&to_seq(&q), &to_seq(&r), &gp);
        let mode = if sw_mode { Mode::Sw } else { Mode::Nw };
        let path = backtrack(&m, mode);
        prop_assert_eq!(path.replay_score(&gp), path.score);
        let expected = match mode {
            Mode::Sw => sw_distance(&to_seq(&q), &to_seq(&r), &gp).0,
            _ => m.get(q.len(), r.len()),
        };
        prop_assert_eq!(path.score, expected);
        // The path consumes exactly the aligned spans.
        let consumed_q = path.ops.iter().filter(|o| o.letter() != 'I').count();
        let consumed_r = path.ops.iter().filter(|o| o.letter() != 'D').count();
        prop_assert_eq!(consumed_q, q.len());
        prop_assert_eq!(consumed_r, path.end.1);
    }

    #[test]
    fn row_steps_are_lipschitz_in_the_max_penalty(
        q in codes_strategy(12),
        r in codes_strategy(12),
        gp in penalties_strategy(),
    ) {
        let m = full_matrix(&to_seq(&q), &to_seq(&r), &gp);
        let bound = gp.max_cost();
        for i in 1..m.rows() {
            for j in 0..m.cols() {
                prop_assert!((m.get(i, j) - m.get(i - 1, j)).abs() <= bound);
            }
        }
    }

    // The central equivalence: a single-tile lattice's output cycles equal
    // the scaled exact distances under the shifted penalties, for both taps.
    #[test]
    fn lattice_equals_scaled_oracle_single_tile(
        q in codes_strategy(24),
        r in codes_strategy(24),
        gp in penalties_strategy(),
        scale in 1i64..4,
    ) {
        let (qs, rs) = (to_seq(&q), to_seq(&r));
        let enc = EncodingParams::new(-gp.match_cost, scale);
        let delays = encode_penalties(&gp, &enc).unwrap();
        let shifted = gp.shifted(enc.shift);
        let tile = q.len().max(r.len());

        let nw_lat = build_lattice(&qs, &rs, &LatticeConfig::nw(delays, tile)).unwrap();
        let nw_res = nw_lat.simulate(false);
        prop_assert_eq!(
            nw_res.output_cycles as i64,
            scale * nw_distance(&qs, &rs, &shifted)
        );

        let sw_lat = build_lattice(&qs, &rs, &LatticeConfig::sw(delays, tile)).unwrap();
        let sw_res = sw_lat.simulate(false);
        let (sw_score, sw_col) = sw_distance(&qs, &rs, &shifted);
        prop_assert_eq!(sw_res.output_cycles as i64, scale * sw_score);
        prop_assert_eq!(sw_res.output_column, Some(sw_col));
        prop_assert!(sw_res.triggered_count <= nw_res.triggered_count);
    }

    // Tiling adds deterministic offsets that decode removes: keys never
    // depend on the tile length, raw cycles differ by the counted stages.
    #[test]
    fn decode_is_tile_invariant(
        q in codes_strategy(20),
        r in codes_strategy(20),
        gp in penalties_strategy(),
        tile_len in 1usize..12,
        sw_mode in any::<bool>(),
    ) {
        let (qs, rs) = (to_seq(&q), to_seq(&r));
        let enc = EncodingParams::canonical_for(&gp);
        let delays = encode_penalties(&gp, &enc).unwrap();
        let mode = if sw_mode { Mode::Sw } else { Mode::Nw };
        let mk = |tile: usize| LatticeConfig {
            delays,
            tile_len: tile,
            mode,
            timeout_cycles: None,
            band_max_edits: None,
        };
        let single = build_lattice(&qs, &rs, &mk(q.len().max(r.len()))).unwrap();
        let base = single.simulate(false);
        let tiled = build_lattice(&qs, &rs, &mk(tile_len)).unwrap();
        let res = tiled.simulate(false);
        prop_assert_eq!(tiled.decode(&res), single.decode(&base));
        if mode == Mode::Sw {
            prop_assert_eq!(res.output_column, base.output_column);
        }
        let boundaries = |l: usize| ((l - 1) / tile_len) as u64;
        let col = res.output_column.unwrap_or(r.len());
        let col_off = if col == 0 { 0 } else { ((col - 1) / tile_len) as u64 };
        prop_assert_eq!(res.output_cycles, tiled.decode(&res) + boundaries(q.len()) + col_off);
    }

    #[test]
    fn counter_width_bounds_single_tile_cycles(
        q in codes_strategy(24),
        r in codes_strategy(24),
        gp in penalties_strategy(),
    ) {
        let (qs, rs) = (to_seq(&q), to_seq(&r));
        let enc = EncodingParams::canonical_for(&gp);
        let delays = encode_penalties(&gp, &enc).unwrap();
        let Ok(width) = counter_width(&delays, q.len(), r.len()) else {
            // All-zero bound: only when the relevant delays vanish.
            return Ok(());
        };
        let tile = q.len().max(r.len());
        let res = build_lattice(&qs, &rs, &LatticeConfig::nw(delays, tile))
            .unwrap()
            .simulate(false);
        prop_assert!(res.output_cycles <= (1u64 << width));
    }

    #[test]
    fn packed_text_roundtrip(text in "[ACGT]{1,200}") {
        let s = PackedSequence::from_text(&text).unwrap();
        prop_assert_eq!(s.to_text(), text);
    }
}

// What the encoding provably preserves across candidate sets. The scale
// factor multiplies every score, so the full sorted order (ties and all)
// is invariant under any scale. A shift re-prices paths by their operation
// count, which can reorder distance ties deep in a candidate list, but the
// argmin is stable whenever a perfect-match candidate is present: the
// zero-distance window's all-diagonal route has the minimum possible op
// count, so no shift can price another candidate below it.
#[test]
fn encoding_order_guarantees() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..300 {
        let matched = rng.gen_range(0i64..3);
        let mismatch = matched + rng.gen_range(1..5);
        let insert = matched + rng.gen_range(1..4);
        let delete = matched + rng.gen_range(1..4);
        let gp = GapPenalties::new(matched, mismatch, insert, delete);

        let read_len = rng.gen_range(16usize..=48);
        let read = random_reference(read_len, rng.gen());
        let read_codes = read.codes();
        let mut windows: Vec<Seq> = (0..rng.gen_range(2usize..10))
            .map(|_| {
                if rng.gen_bool(0.7) {
                    let mut codes = read_codes.clone();
                    for c in codes.iter_mut() {
                        if rng.gen_bool(0.1) {
                            *c = (*c + rng.gen_range(1..4u8)) % 4;
                        }
                    }
                    PackedSequence::from_codes(&codes).unwrap()
                } else {
                    random_reference(read_len, rng.gen())
                }
            })
            .collect();
        // Plant the true locus somewhere in the set.
        let true_idx = rng.gen_range(0..=windows.len());
        windows.insert(true_idx, PackedSequence::from_codes(&read_codes).unwrap());

        let scores_under = |shift: i64| -> Vec<i64> {
            let shifted = gp.shifted(shift);
            windows
                .iter()
                .map(|w| nw_distance(&read, w, &shifted))
                .collect()
        };
        let order = |scores: &[i64], scale: i64| -> Vec<usize> {
            let mut keyed: Vec<(i64, usize)> = scores
                .iter()
                .enumerate()
                .map(|(idx, &s)| (scale * s, idx))
                .collect();
            keyed.sort();
            keyed.into_iter().map(|(_, idx)| idx).collect()
        };

        // Scale invariance: exact at every shift.
        for shift in [-gp.match_cost, -gp.match_cost + 2] {
            let scores = scores_under(shift);
            let base = order(&scores, 1);
            for scale in 2..5 {
                assert_eq!(order(&scores, scale), base, "case {case}: scale moved order");
            }
        }

        // Argmin stability across shifts with a perfect candidate present.
        let canonical = order(&scores_under(-gp.match_cost), 1);
        for shift in [-gp.match_cost + 1, -gp.match_cost + 3] {
            let shifted_order = order(&scores_under(shift), 1);
            assert_eq!(
                shifted_order[0], canonical[0],
                "case {case}: argmin moved under shift {shift} (gp {gp:?})"
            );
        }
    }
}
