"""Neural search policy: 7 scaled features -> 6 search parameters.

Flat parameter layout (length 104): W1 (7x7, row-major), b1 (7), W2 (6x7,
row-major), b2 (6). Raw outputs are ordered eps, S, R, L, C, c.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import FeatureVector, ScalingProfile, scale
from .search.params import SearchParams

N_IN = 7
N_HIDDEN = 7
N_OUT = 6
THETA_SIZE = N_HIDDEN * N_IN + N_HIDDEN + N_OUT * N_HIDDEN + N_OUT  # 104
OUTPUT_NAMES = ("eps", "S", "R", "L", "C", "c")
# multipliers for the integer outputs S, R, L, C
OUTPUT_SCALES = {"S": 10, "R": 5, "L": 10, "C": 100}
POLICY_FORMAT = "paraplan-policy/1"


def sigmoid(z):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


_OPEN_LO = math.ulp(0.0)
_OPEN_HI = math.nextafter(1.0, 0.0)


def _sigmoid_scalar(z: float) -> float:
    """Logistic function kept strictly inside (0, 1) despite rounding."""
    if z >= 0:
        v = 1.0 / (1.0 + math.exp(-z))
    else:
        e = math.exp(z)
        v = e / (1.0 + e)
    return min(max(v, _OPEN_LO), _OPEN_HI)


@dataclass(frozen=True)
class PolicyNet:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def forward(self, x) -> np.ndarray:
        return forward(self, x)

    def hidden(self, x) -> np.ndarray:
        return sigmoid(self.w1 @ x + self.b1)


def decode(theta) -> PolicyNet:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (THETA_SIZE,):
        raise ValueError(f"theta must have length {THETA_SIZE}, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta has non-finite entries")
    i = 0
    w1 = theta[i : i + N_HIDDEN * N_IN].reshape(N_HIDDEN, N_IN).copy()
    i += N_HIDDEN * N_IN
    b1 = theta[i : i + N_HIDDEN].copy()
    i += N_HIDDEN
    w2 = theta[i : i + N_OUT * N_HIDDEN].reshape(N_OUT, N_HIDDEN).copy()
    i += N_OUT * N_HIDDEN
    b2 = theta[i : i + N_OUT].copy()
    for a in (w1, b1, w2, b2):
        a.setflags(write=False)
    return PolicyNet(w1, b1, w2, b2)


def encode(net: PolicyNet) -> np.ndarray:
    return np.concatenate([net.w1.ravel(), net.b1, net.w2.ravel(), net.b2])


def forward(net: PolicyNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (N_IN,):
        raise ValueError(f"expected {N_IN} features, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite policy input")
    return net.w2 @ sigmoid(net.w1 @ x + net.b1) + net.b2


def jacobian(net: PolicyNet, x) -> np.ndarray:
    """d raw / d x, shape (6, 7)."""
    h = net.hidden(np.asarray(x, dtype=np.float64))
    return net.w2 @ (np.diag(h * (1.0 - h)) @ net.w1)


def to_search_params(raw) -> SearchParams:
    eps, s, r, l, c_len, frac = (float(v) for v in raw)

    def count(y, key):
        return int(math.floor(max(y, 0.0) * OUTPUT_SCALES[key]))

    return SearchParams(
        epsilon=_sigmoid_scalar(eps),
        stall=count(s, "S"),
        walks=count(r, "R"),
        walk_length=count(l, "L"),
        cycle=count(c_len, "C"),
        local_frac=_sigmoid_scalar(frac),
    )


class PolicyController:
    """Callable parameter source for the engine: features -> SearchParams."""

    def __init__(self, net: PolicyNet, profile: ScalingProfile):
        self.net = net
        self.profile = profile
        self.calls = 0

    def __call__(self, fv: FeatureVector) -> SearchParams:
        self.calls += 1
        return to_search_params(forward(self.net, scale(fv, self.profile)))


@dataclass
class PolicyFile:
    theta: np.ndarray
    profile_path: str | None = None
    profile_checksum: str | None = None
    meta: dict | None = None

    def to_json(self) -> str:
        body = {
            "format": POLICY_FORMAT,
            "layout": "W1[7x7] row-major, b1[7], W2[6x7] row-major, b2[6]",
            "outputs": list(OUTPUT_NAMES),
            "output_scales": OUTPUT_SCALES,
            "theta": [float(v) for v in self.theta],
            "profile": self.profile_path,
            "profile_checksum": self.profile_checksum,
            "meta": self.meta or {},
        }
        return json.dumps(body, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PolicyFile":
        try:
            body = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"malformed policy file: {e}") from None
        if not isinstance(body, dict) or body.get("format") != POLICY_FORMAT:
            raise ValueError("malformed policy file: missing or unknown format tag")
        if body.get("output_scales", OUTPUT_SCALES) != OUTPUT_SCALES:
            raise ValueError("policy file uses different output scales")
        theta = np.asarray(body.get("theta", []), dtype=np.float64)
        decode(theta)
        return cls(theta, body.get("profile"), body.get("profile_checksum"), body.get("meta"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "PolicyFile":
        return cls.from_json(Path(path).read_text())

    def resolve_profile(self, policy_path, override=None) -> ScalingProfile:
        """Load the referenced scaling profile (relative to the policy file)."""
        if override is not None:
            return ScalingProfile.load(override)
        if not self.profile_path:
            raise FileNotFoundError("policy file names no scaling profile; pass one explicitly")
        path = Path(self.profile_path)
        if not path.is_absolute():
            path = Path(policy_path).parent / path
        if not path.exists():
            raise FileNotFoundError(f"scaling profile {path} not found")
        profile = ScalingProfile.load(path)
        if self.profile_checksum and profile.checksum() != self.profile_checksum:
            raise ValueError(f"scaling profile {path} does not match the policy's checksum")
        return profile

    def controller(self, profile: ScalingProfile) -> PolicyController:
        return PolicyController(decode(self.theta), profile)
