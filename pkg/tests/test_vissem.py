import numpy as np
import pytest

from adrank import synth
from adrank.errors import ConfigError, DimensionError
from adrank.vissem import (
    Dims,
    ProjectionModel,
    TrainConfig,
    TripletSample,
    VisualFeatures,
    aggregate_patches,
    embed_image,
    init_model,
    loss_gradient,
    train,
    triplet_loss,
)


def unit(x):
    x = np.asarray(x, dtype=np.float64)
    return x / np.linalg.norm(x)


class TestAggregate:
    def test_mean_and_concat(self):
        f = VisualFeatures(
            object_patches=[np.array([2.0, 0.0]), np.array([0.0, 2.0])],
            symbol_patches=[np.array([4.0])],
        )
        assert np.allclose(aggregate_patches(f), [1.0, 1.0, 4.0])

    def test_empty_channel_zero_block(self):
        f = VisualFeatures(object_patches=[], symbol_patches=[np.array([4.0])], object_dim=2)
        assert np.allclose(aggregate_patches(f), [0.0, 0.0, 4.0])

    def test_inconsistent_dims(self):
        with pytest.raises(DimensionError):
            VisualFeatures(object_patches=[np.array([1.0, 2.0]), np.array([1.0, 2.0, 3.0])])


def make_model(mode, d_obj=3, d_sym=2, d_w=3, d_emb=4, seed=0, beta=0.2):
    dims = Dims(d_obj=d_obj, d_sym=d_sym, d_w=d_w, d_emb=d_emb)
    return init_model(dims, TrainConfig(mode=mode, d_emb=d_emb, beta=beta, seed=seed))


class TestEmbedImage:
    def test_plain_identity(self):
        model = make_model("plain", d_obj=1, d_sym=1, d_emb=2)
        model.W_v = np.eye(2)
        z = embed_image(model, np.array([3.0, 4.0]))
        assert np.allclose(z, [0.6, 0.8])

    def test_fused_concat_normalize(self):
        model = make_model("fused", d_obj=1, d_sym=1, d_w=2, d_emb=2)
        model.W_v = np.array([[1.0, 0.0], [0.0, 0.0]])  # W_v v = (1, 0) for v=(1, *)
        model.W_c = np.eye(4)
        z = embed_image(model, np.array([1.0, 5.0]), t=np.array([0.0, 1.0]))
        assert np.allclose(z, np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2))

    def test_partitioned_equal_heads(self):
        model = make_model("partitioned")
        model.W_r = model.W_a.copy()
        z_a, z_r = embed_image(model, np.ones(5))
        assert np.allclose(z_a, z_r)

    def test_unit_norm_all_modes(self):
        rng = np.random.default_rng(0)
        for mode in ("plain", "fused", "partitioned", "partitioned_fused"):
            model = make_model(mode, seed=1)
            for _ in range(50):
                out = embed_image(model, rng.normal(size=5), t=rng.normal(size=3))
                zs = out if isinstance(out, tuple) else (out,)
                for z in zs:
                    assert abs(np.linalg.norm(z) - 1.0) < 1e-9

    def test_fused_missing_text_zero_block(self):
        model = make_model("fused")
        z = embed_image(model, np.ones(5), t=None)
        z2 = embed_image(model, np.ones(5), t=np.zeros(3))
        assert np.allclose(z, z2)

    def test_dim_mismatch(self):
        model = make_model("plain")
        with pytest.raises(DimensionError):
            embed_image(model, np.ones(7))


class TestTripletLoss:
    def test_satisfied_margin(self):
        z = np.array([1.0, 0.0])
        assert triplet_loss(z, z, [np.array([0.0, 1.0])], 0.2) == 0.0

    def test_violated(self):
        z = np.array([1.0, 0.0])
        loss = triplet_loss(z, np.array([0.0, 1.0]), [z], 0.2)
        assert loss == pytest.approx(np.sqrt(2) + 0.2, abs=1e-12)

    def test_degenerate_tie(self):
        z = np.array([1.0, 0.0])
        assert triplet_loss(z, z, [z], 0.2) == pytest.approx(0.2)

    def test_empty_negatives(self):
        with pytest.raises(ValueError):
            triplet_loss(np.ones(2), np.ones(2), [], 0.2)

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            z = unit(rng.normal(size=4))
            pos = unit(rng.normal(size=4))
            negs = [unit(rng.normal(size=4)) for _ in range(3)]
            assert triplet_loss(z, pos, negs, 0.2) >= 0.0


def random_batch(rng, mode, d_emb, k=3, n_negs=2, d_vis=5, d_w=3):
    batch = []
    for _ in range(k):
        batch.append(
            TripletSample(
                v=rng.normal(size=d_vis),
                t=rng.normal(size=d_w),
                pos=unit(rng.normal(size=d_emb)),
                negs=[unit(rng.normal(size=d_emb)) for _ in range(n_negs)],
                pos_action=unit(rng.normal(size=d_emb)),
                negs_action=[unit(rng.normal(size=d_emb)) for _ in range(n_negs)],
                pos_reason=unit(rng.normal(size=d_emb)),
                negs_reason=[unit(rng.normal(size=d_emb)) for _ in range(n_negs)],
            )
        )
    return batch


def finite_difference_check(model, batch, h=1e-5, rtol=1e-4):
    loss, grads = loss_gradient(model, batch)
    for name, g in grads.items():
        W = getattr(model, name)
        for idx in np.ndindex(W.shape):
            orig = W[idx]
            W[idx] = orig + h
            lp, _ = loss_gradient(model, batch)
            W[idx] = orig - h
            lm, _ = loss_gradient(model, batch)
            W[idx] = orig
            fd = (lp - lm) / (2 * h)
            denom = max(abs(fd), abs(g[idx]))
            if denom < 1e-7:
                continue  # hinge kink or flat region
            assert abs(fd - g[idx]) / denom <= rtol, (name, idx, fd, g[idx])
    return loss


class TestLossGradient:
    def test_all_satisfied_zero_gradient(self):
        model = make_model("plain")
        # positives exactly at z, negatives far: every hinge strictly inactive
        v = np.ones(5)
        z = embed_image(model, v)
        batch = [
            TripletSample(v=v, pos=z.copy(), negs=[unit(-z + 1e-3)]),
            TripletSample(v=v, pos=z.copy(), negs=[unit(-z - 1e-3)]),
        ]
        loss, grads = loss_gradient(model, batch)
        assert loss == 0.0
        assert all(np.all(g == 0.0) for g in grads.values())

    @pytest.mark.parametrize("mode", ["plain", "fused", "partitioned", "partitioned_fused"])
    def test_finite_differences(self, mode):
        rng = np.random.default_rng(7)
        for d_emb in (2, 4):
            model = make_model(mode, d_emb=d_emb, seed=int(rng.integers(1000)))
            batch = random_batch(rng, mode, d_emb)
            finite_difference_check(model, batch)

    def test_duplicated_batch_same_gradient(self):
        rng = np.random.default_rng(8)
        model = make_model("plain")
        batch = random_batch(rng, "plain", 4)
        l1, g1 = loss_gradient(model, batch)
        l2, g2 = loss_gradient(model, batch + batch)
        assert l1 == pytest.approx(l2, abs=1e-12)
        for name in g1:
            assert np.allclose(g1[name], g2[name], atol=1e-12)

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            loss_gradient(make_model("plain"), [])


@pytest.fixture(scope="module")
def separable():
    cfg = synth.SynthConfig(
        num_images=200,
        num_topics=5,
        statements_per_image=15,
        positives_per_image=3,
        noise_sigma=0.0,
        ocr_dropout=0.0,
        seed=7,
    )
    return synth.generate(cfg)


class TestTrain:
    # frozen at build time from the seed-7 separable run (plain, d_emb 16, lr 0.01)
    FROZEN_FIRST_EPOCH_LOSS = 0.15463843983989822

    def test_loss_halves_on_separable_data(self, separable):
        config = TrainConfig(mode="plain", d_emb=16, epochs=50, lr=0.01, seed=7)
        _, trace = train(separable.records, separable.table, config)
        assert trace[0] == pytest.approx(self.FROZEN_FIRST_EPOCH_LOSS, abs=1e-9)
        assert trace[-1] <= 0.5 * trace[0]

    def test_zero_epochs_is_init(self, separable):
        config = TrainConfig(mode="plain", d_emb=16, epochs=0, seed=7)
        model, trace = train(separable.records, separable.table, config)
        ref = init_model(model.dims, config)
        assert trace == []
        assert np.array_equal(model.W_v, ref.W_v)

    def test_deterministic(self, separable):
        config = TrainConfig(mode="fused", d_emb=16, epochs=3, seed=11)
        m1, t1 = train(separable.records[:60], separable.table, config)
        m2, t2 = train(separable.records[:60], separable.table, config)
        assert t1 == t2
        for name, W in m1.matrices().items():
            assert np.array_equal(W, getattr(m2, name))

    def test_no_trainable_samples(self, toy2):
        with pytest.raises(ConfigError):
            train([], toy2, TrainConfig())

    def test_identity_sanity_zero_loss(self):
        # v already equals its positive statement embedding; W_v = identity
        rng = np.random.default_rng(4)
        model = make_model("plain", d_obj=2, d_sym=2, d_emb=4)
        model.W_v = np.eye(4)
        batch = []
        for _ in range(3):
            pos = unit(rng.normal(size=4))
            batch.append(TripletSample(v=pos.copy(), pos=pos, negs=[unit(-pos)]))
        loss, _ = loss_gradient(model, batch)
        assert loss == 0.0
