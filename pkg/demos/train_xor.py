#!/usr/bin/env python3
"""Train XOR with generated dense blocks and full-batch Adam.

The classic non-linearly-separable toy: two generated dense blocks
(2 -> 4 -> 1, logistic activations), seed-randomized weights, full-batch
Adam at defaults, stop at mean loss < 0.05.
"""

import numpy as np

from npde import (Dataset, LossSpec, OptimizerConfig, Pipeline, gen_dense,
                  sigmoid_reaction, train_supervised)

if __name__ == "__main__":
    data = Dataset([(np.array([0.0, 0.0]), np.array([0.0])),
                    (np.array([0.0, 1.0]), np.array([1.0])),
                    (np.array([1.0, 0.0]), np.array([1.0])),
                    (np.array([1.0, 1.0]), np.array([0.0]))])
    blocks = [gen_dense(np.zeros((4, 2)), np.zeros(4), sigmoid_reaction(1.0)),
              gen_dense(np.zeros((1, 4)), np.zeros(1), sigmoid_reaction(1.0))]
    model = Pipeline.from_blocks(blocks)

    for seed in range(5):
        report = train_supervised(model, data, LossSpec(),
                                  OptimizerConfig("adam"), seed=seed,
                                  max_epochs=5000, target_loss=0.05)
        print(f"seed {seed}: {report.summary()}")

    theta = report.final_theta
    print("predictions with the last trained model:")
    for x, t in data.samples:
        y = model.forward(theta, x)[0]
        print(f"  {x.astype(int)} -> {y:.3f}   (target {t[0]:.0f})")
