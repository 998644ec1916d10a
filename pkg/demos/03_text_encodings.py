"""Full 3D text, sparse 4D text, graph-token layout and the token budget."""

from chemdu.encoding import (
    build_token_layout, encode_3d, encode_4d_sparse, mock_encoder, token_stats,
)
from chemdu.goldens import GOLDEN_DIR
from chemdu.io import parse_extxyz
from chemdu.synth import dense_trajectory

# %% One molecule in the full 3D text form
traj, _ = parse_extxyz((GOLDEN_DIR / "inputs" / "molecule_2frame.extxyz").read_bytes())
print(encode_3d(traj[0]))

# %% The same two frames as a sparse diff: only atoms moving more than 0.1 Å
print(encode_4d_sparse(traj))

# %% Token budget on a dense 10-frame, 200-atom trajectory
dense = dense_trajectory(seed=0)
full = token_stats("".join(encode_3d(f) for f in dense))["whitespace_tokens"]
sparse = token_stats(encode_4d_sparse(dense))["whitespace_tokens"]
print(f"full 3D: {full} tokens, sparse 4D: {sparse} tokens ({sparse / full:.1%})")

# %% Graph-token layout with a deterministic stand-in encoder
layout = build_token_layout(traj, mock_encoder)
print(layout.tokens()[:4], "...", "feature rows:", layout.feature_rows.shape)
