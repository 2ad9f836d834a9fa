# Simulate a cohort from known abilities and difficulties, fit the model,
# and see how well the estimates line up with the truth.
import numpy as np

from skillirt import FitConfig, PriorConfig, SynthSpec, fit_map, generate

table, truth = generate(SynthSpec(num_students=200, num_skills=20, responses_per_student=100, seed=7))
print(f"{len(table)} responses from {table.num_students} students on {table.num_skills} skills")

result = fit_map(table, PriorConfig(sigma_squared=100.0), FitConfig())
print(result.termination_reason, "after", result.iterations, "iterations")

r_theta = np.corrcoef(result.params.theta, truth.theta)[0, 1]
r_beta = np.corrcoef(result.params.beta, truth.beta)[0, 1]
print(f"correlation with truth: abilities {r_theta:.3f}, difficulties {r_beta:.3f}")

# Difficulties are estimated from thousands of responses each, abilities from
# a hundred, so the ability estimates are noticeably more spread out.
print("estimated ability sd:", result.params.theta.std().round(3), " true:", truth.theta.std().round(3))

# The likelihood only sees theta - beta; the prior is what fixes the common shift.
print("mean theta + mean beta:", (result.params.theta.mean() + result.params.beta.mean()).round(4))
