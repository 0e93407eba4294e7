#!/usr/bin/env python3
# Copyright 2026 The hmgame Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Monte Carlo calibration of the noisy-human convergence threshold.

Simulates batches of 100 1x1 sessions (L0 = 0, delta = 1, alpha = 1, K = 10)
started from the 8 circle points of radius 0.65, with a human whose settled
action in each trial is the exact best response plus N(0, sigma^2), clipped
to [-1, 1]. For every batch it takes the median total L1 error at k = 10 and
reports a high quantile of those medians. The acceptance suite asserts the
C++ batch median against the value printed here.

The simulation is written directly from the update rules with numpy and does
not share code with the C++ library.
"""

import argparse
import math

import numpy as np


def simulate_batches(batches, sessions, sigma, iterations, radius, rng):
    n = batches * sessions
    idx = np.arange(n) % 8
    ang = idx * (math.pi / 4.0)
    h_hat = radius * np.cos(ang)
    m_hat = radius * np.sin(ang)
    gain = 0.0
    pert = gain + 1.0  # delta = 1
    alpha = 1.0
    for _ in range(iterations):
        # unperturbed trial: BR to m = gain (h - h_hat) + m_hat
        br0 = (gain * gain * h_hat - gain * m_hat) / (1.0 + gain * gain)
        h1 = np.clip(br0 + sigma * rng.standard_normal(n), -1.0, 1.0)
        # perturbed trial
        br1 = (pert * pert * h_hat - pert * m_hat) / (1.0 + pert * pert)
        h2 = np.clip(br1 + sigma * rng.standard_normal(n), -1.0, 1.0)
        m2 = pert * (h2 - h_hat) + m_hat
        h_hat, m_hat = h1, m_hat + alpha * (m2 - m_hat)
    total = np.abs(h_hat) + np.abs(m_hat)
    return np.median(total.reshape(batches, sessions), axis=1)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batches", type=int, default=20000)
    ap.add_argument("--sessions", type=int, default=100)
    ap.add_argument("--sigma", type=float, default=0.05)
    ap.add_argument("--quantile", type=float, default=0.9999)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    medians = simulate_batches(args.batches, args.sessions, args.sigma, 10,
                               0.65, rng)
    q = float(np.quantile(medians, args.quantile))
    threshold = math.ceil(q * 1000.0) / 1000.0
    print(f"batch medians: mean={medians.mean():.6f} sd={medians.std():.6f} "
          f"min={medians.min():.6f} max={medians.max():.6f}")
    print(f"quantile {args.quantile}: {q:.6f}")
    print(f"threshold: {threshold:.3f}")


if __name__ == "__main__":
    main()
