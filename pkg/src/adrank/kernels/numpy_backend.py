"""Pure-NumPy implementation of the triplet backprop kernel.

Computes loss and gradients of the batch-mean triplet hinge loss through
z = normalize(W @ c). Semantics must stay in lockstep with the compiled
kernel (kernels._ckern); tests assert parity.
"""

import numpy as np


def triplet_linear_grad(W, C, P, negs, offsets, beta):
    """Loss plus gradients d/dW and d/dC of the batch-mean triplet loss.

    W       (Dout, Din)  projection matrix
    C       (K, Din)     per-sample inputs
    P       (K, Dout)    unit positive targets
    negs    (M, Dout)    concatenated unit negative targets
    offsets (K+1,)       negs[offsets[i]:offsets[i+1]] belong to sample i
    beta                 hinge margin

    Per sample: mean over its negatives of max(0, ||z-p|| - ||z-q|| + beta);
    batch loss is the mean over samples. Subgradient 0 at hinge kinks and at
    zero distances.
    """
    K, _ = C.shape
    U = C @ W.T
    loss = 0.0
    dW = np.zeros_like(W)
    dC = np.zeros_like(C)
    for i in range(K):
        m = offsets[i + 1] - offsets[i]
        if m == 0:
            continue
        u = U[i]
        n = float(np.linalg.norm(u))
        z = u / n if n > 0.0 else np.zeros_like(u)
        pvec = z - P[i]
        dpos = float(np.linalg.norm(pvec))
        gz = np.zeros_like(z)
        li = 0.0
        for j in range(offsets[i], offsets[i + 1]):
            qvec = z - negs[j]
            dneg = float(np.linalg.norm(qvec))
            h = dpos - dneg + beta
            if h > 0.0:
                li += h
                if dpos > 0.0:
                    gz += pvec / dpos
                if dneg > 0.0:
                    gz -= qvec / dneg
        loss += li / m
        if n > 0.0:
            gz /= K * m
            gu = (gz - np.dot(gz, z) * z) / n
            dW += np.outer(gu, C[i])
            dC[i] = W.T @ gu
    return loss / K, dW, dC
