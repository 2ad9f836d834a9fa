# Refit on random subsamples of one parent log and check that the cohort
# summary barely moves between sample sizes and seeds.
from skillirt import PriorConfig, SynthSpec, fit_map, generate, subsample
from skillirt import analytics

parent, _ = generate(SynthSpec(2000, 60, (10, 50), seed=5))
print(f"parent table: {len(parent)} records")

for n in (20_000, 40_000):
    for seed in (42, 2025):
        sample = subsample(parent, n, seed)
        result = fit_map(sample, PriorConfig(100.0))
        s = analytics.cohort_summary(result)
        print(
            f"n={n:<6} seed={seed:<5} students={sample.num_students:<5} skills={sample.num_skills:<3}"
            f" {result.termination_reason:<14} mean ability {s.ability.mean:+.3f}  mean difficulty {s.difficulty.mean:+.3f}"
        )
