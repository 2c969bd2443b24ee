"""A tour of the dense-network engine: tensors, backprop, and Adam.

Builds a two-layer network by hand, trains it on a toy regression problem,
and verifies every analytic gradient against central finite differences.
"""

import numpy as np

from grcgan import tensor as T
from grcgan.gradcheck import layer_check_suite, max_rel_error, numeric_grad
from grcgan.nn import LayerSpec, MlpSpec, Network
from grcgan.optim import Adam, AdamParams
from grcgan.tensor import Tensor, backward

rng = np.random.default_rng(0)

# --- a scalar chain, differentiated by hand vs the engine ------------------
w = Tensor(np.array([[0.7]]), requires_grad=True)
loss = T.mean_all(T.mul(T.sigmoid(w), T.sigmoid(w)))
backward(loss)
s = 1 / (1 + np.exp(-0.7))
print(f"d/dw sigmoid(w)^2 at 0.7: engine={w.grad[0, 0]:.10f} hand={2 * s * s * (1 - s):.10f}")

# --- fit y = sin(x) with a small MLP ---------------------------------------
net = Network(MlpSpec(1, (LayerSpec(32, "relu"), LayerSpec(32, "relu")), 1), rng)
opt = Adam(net.parameters(), AdamParams(lr=1e-2))
x = np.linspace(-3, 3, 256).reshape(-1, 1)
y = np.sin(x)
for step in range(400):
    pred = net.forward(x, train=True)
    err = T.sub(pred, Tensor(y))
    loss = T.mean_all(T.mul(err, err))
    net.zero_grad()
    backward(loss)
    opt.step()
    if step % 100 == 0:
        print(f"step {step:3d}: mse={loss.item():.5f}")
print(f"final mse: {loss.item():.5f}")

# --- spot-check one weight against finite differences -----------------------
p = net.parameters()[0]

def scalar_loss():
    pred = net.forward(x, train=True)
    err = T.sub(pred, Tensor(y))
    return T.mean_all(T.mul(err, err)).item()

net.zero_grad()
pred = net.forward(x, train=True)
err = T.sub(pred, Tensor(y))
backward(T.mean_all(T.mul(err, err)))
num = numeric_grad(scalar_loss, p.data, h=1e-5)
print(f"weight-gradient rel. error vs finite differences: {max_rel_error(p.grad, num):.2e}")

# --- the full layer suite ----------------------------------------------------
results = layer_check_suite(seed=1)
worst = max(results, key=lambda r: r.rel_error)
print(f"{len(results)} layer gradient checks, worst rel. error {worst.rel_error:.2e} ({worst.name})")
