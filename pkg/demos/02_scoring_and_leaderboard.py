"""
Ground-truth normalization and the leaderboard
==============================================

Shows how raw per-video metrics turn into [0, 1] scores relative to a
ground-truth reference, and how score cards rank into a leaderboard.
"""

from headeval import MetricVector, aggregate_model, build_leaderboard, normalize_to_gt

# The normalization rule: similarity to the ground-truth value, clamped.
print("score = 1 - |model - gt| / gt, clamped to [0, 1]")
for model, gt in ((0.8, 0.8), (0.4, 0.8), (1.2, 0.8), (2.5, 0.8)):
    print(f"  model {model:4.1f} vs gt {gt}: {normalize_to_gt(model, gt):.3f}")

# Three videos of raw metrics per model, aggregated against the ground truth.
def vec(lips, head, sync):
    return MetricVector(global_aesthetics=0.8, mouth_quality=0.75, face_quality=0.7,
                        lip_dynamics=lips, head_motion_dynamics=head,
                        eyebrow_dynamics=0.05, silent_lip_stability=0.002,
                        lip_sync=sync)

gt_vectors = [vec(2.0, 1.5, 0.10), vec(2.2, 1.4, 0.12), vec(1.9, 1.6, 0.11)]
subtle = [vec(1.0, 0.7, 0.13), vec(1.1, 0.8, 0.12), vec(0.9, 0.6, 0.14)]
faithful = [vec(1.9, 1.5, 0.12), vec(2.1, 1.5, 0.13), vec(2.0, 1.5, 0.12)]

cards = [
    aggregate_model("ground_truth", gt_vectors, gt_vectors),
    aggregate_model("subtle", subtle, gt_vectors),
    aggregate_model("faithful", faithful, gt_vectors),
]

print("\nleaderboard:")
print(build_leaderboard(cards).render_text())
