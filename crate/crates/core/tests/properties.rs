use std::collections::BTreeMap;

use glru::analytic::{solve_tc, DEFAULT_TOL};
use glru::catalog::{censored_pareto_lengths, zipf_popularity};
use glru::delivery::{stall_duration, ServiceDraws};
use glru::workload::generate_trace;
use glru::{CacheState, CorrelationMode, DownloadTimeline, FifoQueue, FileCatalog, FileId, PolicyKind};
use proptest::prelude::*;

fn catalog_strategy(max_files: usize, max_chunks: u32) -> impl Strategy<Value = FileCatalog> {
    (1..=max_files)
        .prop_flat_map(move |n| {
            (
                0.1f64..2.0,
                prop::collection::vec(1..=max_chunks, n),
            )
        })
        .prop_map(|(alpha, chunks)| {
            let pop = zipf_popularity(chunks.len(), alpha).unwrap();
            FileCatalog::new(pop, chunks).unwrap()
        })
}

fn policy_strategy() -> impl Strategy<Value = PolicyKind> {
    prop_oneof![Just(PolicyKind::Lru), Just(PolicyKind::Glru)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_permutes_chunk_counts(cat in catalog_strategy(60, 40)) {
        let mut original = cat.chunks().to_vec();
        original.sort_unstable();
        for mode in [CorrelationMode::Positive, CorrelationMode::Negative, CorrelationMode::Independent] {
            let coupled = cat.couple_popularity_size(mode);
            let mut sizes = coupled.chunks().to_vec();
            sizes.sort_unstable();
            prop_assert_eq!(&sizes, &original);
            prop_assert_eq!(coupled.popularity(), cat.popularity());
        }
    }

    #[test]
    fn coupling_is_monotone(cat in catalog_strategy(60, 40)) {
        let pos = cat.couple_popularity_size(CorrelationMode::Positive);
        let neg = cat.couple_popularity_size(CorrelationMode::Negative);
        for w in pos.chunks().windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for w in neg.chunks().windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn censored_lengths_in_bounds(
        n in 1usize..500,
        shape in 1.1f64..4.0,
        scale in 1.0f64..500.0,
        ratio in 1.5f64..20.0,
        seed in any::<u64>(),
    ) {
        let cap = scale * ratio;
        let lengths = censored_pareto_lengths(n, shape, scale, cap, seed).unwrap();
        prop_assert_eq!(lengths.len(), n);
        for l in lengths {
            prop_assert!(l >= scale && l <= cap, "{} outside [{}, {}]", l, scale, cap);
        }
    }

    #[test]
    fn zipf_ratio(n in 1usize..2000, alpha in 0.05f64..3.0) {
        let q = zipf_popularity(n, alpha).unwrap();
        for k in 1..=n {
            let expected = (k as f64).powf(alpha);
            let ratio = q[0] / q[k - 1];
            prop_assert!((ratio - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn cache_conservation_growth_and_recency(
        sizes in prop::collection::vec(1u32..12, 1..25),
        capacity in 1u64..60,
        policy in policy_strategy(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..300),
    ) {
        let mut cache = CacheState::with_sizes(capacity, sizes.clone()).unwrap();
        for pick in picks {
            let f = FileId(pick.index(sizes.len()));
            let prev = cache.cached(f);
            let before = cache.occupancy();
            let out = cache.request(f, policy).unwrap();
            let added = match policy {
                PolicyKind::Lru => sizes[f.0] - prev,
                PolicyKind::Glru => (sizes[f.0] - prev).min(1),
            };
            prop_assert_eq!(out.chunks_hit, prev);
            prop_assert_eq!(out.chunks_added, added);
            prop_assert_eq!(cache.occupancy(), capacity.min(before + u64::from(added)));
            if policy == PolicyKind::Glru {
                // gLRU can lose chunks of the requested file only if it is the sole entry
                let now = cache.cached(f);
                prop_assert!(now == prev + added || cache.len() == 1);
                prop_assert!(now <= prev + 1);
            }
            match cache.entries().next() {
                Some((head, _)) => prop_assert_eq!(head, f),
                None => prop_assert!(false, "cache empty after a request"),
            }
            cache.check_invariants().unwrap();
        }
    }

    #[test]
    fn full_once_filled(
        sizes in prop::collection::vec(1u32..10, 2..30),
        cap_frac in 0.05f64..0.95,
        policy in policy_strategy(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..400),
    ) {
        let total: u64 = sizes.iter().map(|&s| u64::from(s)).sum();
        let capacity = ((cap_frac * total as f64) as u64).clamp(1, total - 1);
        let mut cache = CacheState::with_sizes(capacity, sizes.clone()).unwrap();
        let mut inserted = 0u64;
        for pick in picks {
            let f = FileId(pick.index(sizes.len()));
            let out = cache.request(f, policy).unwrap();
            inserted += u64::from(out.chunks_added);
            if inserted >= capacity {
                prop_assert_eq!(cache.occupancy(), capacity);
            }
        }
    }

    #[test]
    fn single_chunk_trajectories_coincide(
        n in 1usize..40,
        capacity in 1u64..40,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..300),
    ) {
        let mut lru = CacheState::with_sizes(capacity, vec![1; n]).unwrap();
        let mut glru = CacheState::with_sizes(capacity, vec![1; n]).unwrap();
        for pick in picks {
            let f = FileId(pick.index(n));
            let a = lru.request(f, PolicyKind::Lru).unwrap();
            let b = glru.request(f, PolicyKind::Glru).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(lru.entries().eq(glru.entries()));
        }
    }

    #[test]
    fn stall_nonnegative_and_monotone(
        ready in prop::collection::vec(0.0f64..50.0, 1..20),
        d_s in 0.0f64..10.0,
        chunk_len in 0.1f64..5.0,
        bump_at in any::<prop::sample::Index>(),
        bump in 0.0f64..20.0,
        extra_delay in 0.0f64..10.0,
    ) {
        let base = stall_duration(ready.iter().copied(), d_s, chunk_len);
        prop_assert!(base >= 0.0);

        let mut later = ready.clone();
        let k = bump_at.index(later.len());
        later[k] += bump;
        prop_assert!(stall_duration(later.iter().copied(), d_s, chunk_len) >= base - 1e-12);

        prop_assert!(stall_duration(ready.iter().copied(), d_s + extra_delay, chunk_len) <= base + 1e-12);
    }

    #[test]
    fn stall_matches_play_schedule(
        ready in prop::collection::vec(0.0f64..50.0, 1..20),
        d_s in 0.0f64..10.0,
        chunk_len in 0.1f64..5.0,
    ) {
        let mut play = d_s.max(ready[0]);
        for &r in &ready[1..] {
            play = (play + chunk_len).max(r);
        }
        let direct = (play - (d_s + (ready.len() - 1) as f64 * chunk_len)).max(0.0);
        let stall = stall_duration(ready.iter().copied(), d_s, chunk_len);
        prop_assert!((stall - direct).abs() <= 1e-9, "{} vs {}", stall, direct);
    }

    #[test]
    fn fifo_is_work_conserving(
        arrivals in prop::collection::vec((0.0f64..5.0, 0usize..6), 1..40),
        seed in any::<u64>(),
    ) {
        let draws = ServiceDraws::new(seed, 1.3).unwrap();
        let mut queue = FifoQueue::new();
        let mut t = 0.0;
        for (k, (gap, n)) in arrivals.into_iter().enumerate() {
            t += gap;
            let busy = queue.busy_until();
            let services: Vec<f64> = draws.chunk_times(k as u64, 0).take(n).collect();
            let done = queue.enqueue(t, n, services.iter().copied());
            // the server starts the first chunk as soon as it is both free and has work
            let mut clock = busy.max(t);
            for (c, s) in done.iter().zip(&services) {
                clock += s;
                prop_assert!((c - clock).abs() <= 1e-9 * clock.max(1.0));
            }
        }
    }

    #[test]
    fn more_cached_chunks_never_hurt(
        size in 1u32..40,
        more in any::<prop::sample::Index>(),
        fewer in any::<prop::sample::Index>(),
        backlog in 0.0f64..100.0,
        seed in any::<u64>(),
        d_s in 0.0f64..10.0,
        chunk_len in 0.5f64..4.0,
    ) {
        let a = more.index(size as usize + 1) as u32;
        let b = fewer.index(size as usize + 1) as u32;
        let (hi, lo) = (a.max(b), a.min(b));
        let draws = ServiceDraws::new(seed, 0.8).unwrap();
        let timeline = |cached: u32| {
            let mut queue = FifoQueue::new();
            queue.enqueue(0.0, 1, [backlog]);
            let done = queue.enqueue(1.0, (size - cached) as usize, draws.chunk_times(7, cached));
            DownloadTimeline::from_prefix(1.0, cached as usize, &done)
        };
        let (rich, poor) = (timeline(hi), timeline(lo));
        prop_assert!(rich.download_time() <= poor.download_time() + 1e-12);
        prop_assert!(rich.stall_duration(d_s, chunk_len) <= poor.stall_duration(d_s, chunk_len) + 1e-12);
        if hi == size {
            prop_assert_eq!(rich.download_time(), 0.0);
            prop_assert_eq!(rich.stall_duration(d_s, chunk_len), 0.0);
        }
    }

    #[test]
    fn solver_residual_and_normalization(
        cat in catalog_strategy(200, 50),
        frac in 0.01f64..0.99,
        policy in policy_strategy(),
    ) {
        let total = cat.total_chunks();
        prop_assume!(total > 1);
        let capacity = ((frac * total as f64) as u64).clamp(1, total - 1);
        let model = solve_tc(&cat, capacity, policy, DEFAULT_TOL).unwrap();
        prop_assert!(model.residual() <= DEFAULT_TOL);
        prop_assert!((model.expected_occupancy() - capacity as f64).abs() <= DEFAULT_TOL);
        let mut mean_total = 0.0;
        for id in cat.file_ids() {
            let d = model.chunk_distribution(id).unwrap();
            prop_assert!((d.total() - 1.0).abs() <= 1e-9);
            prop_assert!(d.probs.iter().all(|&p| p >= 0.0));
            if policy == PolicyKind::Glru {
                for j in 1..=cat.size(id) {
                    let h = model.hit_at_least_j(id, j).unwrap();
                    prop_assert!((d.tail(j as usize) - h).abs() <= 1e-12);
                }
            }
            mean_total += d.mean();
        }
        prop_assert!((mean_total - capacity as f64).abs() <= 1e-6 * capacity as f64);
    }

    #[test]
    fn single_chunk_models_agree(n in 2usize..500, alpha in 0.2f64..2.0, frac in 0.01f64..0.99) {
        let cat = FileCatalog::uniform(n, alpha, 1).unwrap();
        let capacity = ((frac * n as f64) as u64).clamp(1, n as u64 - 1);
        let lru = solve_tc(&cat, capacity, PolicyKind::Lru, DEFAULT_TOL).unwrap();
        let glru = solve_tc(&cat, capacity, PolicyKind::Glru, DEFAULT_TOL).unwrap();
        prop_assert_eq!(lru.t_c(), glru.t_c());
        for id in cat.file_ids() {
            prop_assert_eq!(
                lru.chunk_distribution(id).unwrap().probs,
                glru.chunk_distribution(id).unwrap().probs
            );
        }
    }
}

/// Kolmogorov-Smirnov distance between the sample and Exp(rate).
fn ks_exponential(mut sample: Vec<f64>, rate: f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-rate * x).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn per_file_streams_are_poisson() {
    let cat = FileCatalog::uniform(50, 0.8, 3).unwrap();
    let rate = 4.0;
    let trace = generate_trace(&cat, rate, 400_000, 11).unwrap();
    let mut last: BTreeMap<usize, f64> = BTreeMap::new();
    let mut gaps: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in trace.events() {
        if let Some(prev) = last.insert(r.file.0, r.time) {
            gaps.entry(r.file.0).or_default().push(r.time - prev);
        }
    }
    for rank in [1, 5, 20, 50] {
        let id = FileId::from_rank(rank);
        let sample = gaps.remove(&id.0).unwrap();
        let n = sample.len() as f64;
        let d = ks_exponential(sample, rate * cat.request_probability(id));
        // 1.63 / sqrt(n) is the 1% critical value
        assert!(d < 1.63 / n.sqrt(), "rank {rank}: KS {d} with {n} gaps");
    }
}
