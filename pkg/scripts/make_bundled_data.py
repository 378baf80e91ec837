"""Regenerate the bundled double-integrator plant and toy policy files.

The policy is a hand-constructed saturating velocity-command feedback

    u = clip(-k * (x2 + clip(c * x1, -vmax, vmax)), -1, 1)

expressed exactly in a [2,8,4,1] ReLU network via the identities
clip(z, -L, L) = z - relu(z - L) + relu(-z - L) and pass-through neurons
relu(z + offset) = z + offset (valid on the operating region).  Spare
neurons have zero weights and bias 1, so their inactive branch is
infeasible and they add no spurious regions.  Deterministic by
construction; no training involved.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "src", "hznet", "data")

C = 0.5      # position-to-velocity-command gain
VMAX = 1.5   # velocity-command clip
K = 1.2      # velocity-loop gain
OFF1 = 5.0   # pass-through offset, layer 1
OFF2 = 8.0   # pass-through offset, layer 2


def main():
    os.makedirs(DATA, exist_ok=True)
    with open(os.path.join(DATA, "double_integrator_plant.json"), "w") as fh:
        json.dump({"A": [[1.0, 1.0], [0.0, 1.0]], "B": [[0.5], [1.0]]},
                  fh, indent=1)
        fh.write("\n")

    # layer 1: clip arms for c*x1, pass-throughs for x2 and c*x1, 4 spares
    W0 = [[C, 0.0],    # n0 = relu(c x1 - vmax)
          [-C, 0.0],   # n1 = relu(-c x1 - vmax)
          [0.0, 1.0],  # n2 = relu(x2 + OFF1)        -> x2 = n2 - OFF1
          [C, 0.0],    # n3 = relu(c x1 + OFF1)      -> c x1 = n3 - OFF1
          [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
    b0 = [-VMAX, -VMAX, OFF1, OFF1, 1.0, 1.0, 1.0, 1.0]

    # w = -k*(x2 + c x1 - n0 + n1) = k*n0 - k*n1 - k*n2 - k*n3 + 2*k*OFF1
    w_row = [K, -K, -K, -K, 0.0, 0.0, 0.0, 0.0]
    w_bias = 2.0 * K * OFF1
    # layer 2: clip arms for w, pass-through for w, 1 spare
    W1 = [w_row,                      # m0 = relu(w - 1)
          [-v for v in w_row],        # m1 = relu(-w - 1)
          w_row,                      # m2 = relu(w + OFF2) -> w = m2 - OFF2
          [0.0] * 8]
    b1 = [w_bias - 1.0, -w_bias - 1.0, w_bias + OFF2, 1.0]

    # u = w - m0 + m1 = m2 - OFF2 - m0 + m1
    W2 = [[-1.0, 1.0, 1.0, 0.0]]
    b2 = [-OFF2]

    net = {"layers": [
        {"W": W0, "b": b0, "activation": "relu"},
        {"W": W1, "b": b1, "activation": "relu"},
        {"W": W2, "b": b2, "activation": "none"},
    ]}
    with open(os.path.join(DATA, "double_integrator_policy.json"), "w") as fh:
        json.dump(net, fh, indent=1)
        fh.write("\n")
    print("wrote", DATA)


if __name__ == "__main__":
    main()
