# Fit a simulated log and print the descriptive reports: cohort summary,
# easiest and hardest skills, and one student's predicted trajectory.
import numpy as np

from skillirt import PriorConfig, SynthSpec, fit_map, generate
from skillirt import analytics

# Skill weights make practice counts uneven. The generator ties no difficulty
# to popularity, so any practice trend here is noise.
weights = np.geomspace(1, 40, 15)
table, _ = generate(SynthSpec(300, 15, (5, 60), seed=21, skill_weights=weights))
result = fit_map(table, PriorConfig(100.0))

summary = analytics.cohort_summary(result)
for name, d in [("ability", summary.ability), ("difficulty", summary.difficulty)]:
    print(f"{name:<11} n={d.count:<4} mean={d.mean:+.2f} sd={d.std:.2f} quartiles=({d.q25:+.2f}, {d.median:+.2f}, {d.q75:+.2f})")
print("relative mastery (mean ability - mean difficulty):", round(analytics.relative_mastery(summary), 2))

ranking = analytics.rank_skills(result, k=3)
print("easiest:", ", ".join(f"{s} ({b:+.2f})" for s, b in ranking.easiest))
print("hardest:", ", ".join(f"{s} ({b:+.2f})" for s, b in ranking.hardest))

trend = analytics.difficulty_vs_practice(result, table)
print(f"difficulty vs log10(attempts): slope {trend.slope:+.3f}")

traj = analytics.student_trajectory(result, table, "lowest")
probs = [p.probability for p in traj.points]
print(f"lowest-ability student {traj.student}: {len(probs)} attempts, predicted success {min(probs):.2f}..{max(probs):.2f}")
