"""Test EGS1 model file round-trips and rejection of damaged files."""

import struct
import zlib

import numpy as np
import pytest
from scipy.special import logit

from eigengs_core.errors import ModelFormatError
from eigengs_core.models import ColorSpace, Eigenbasis, EigenGaussianModel, GaussianCloud, PlanarImage
from eigengs_core.splat import render_components
from eigengs_core.storage import HEADER, decode_model, encode_model, load_model, save_model


def make_pair(space=ColorSpace.YCBCR, n=9, k=3, n_low=2, k_low=1, seed=0):
    rng = np.random.default_rng(seed)
    width, height = 7, 5
    channels = 1 if space is ColorSpace.LINEAR else 3
    d = width * height * channels

    q, _ = np.linalg.qr(rng.normal(size=(d, k)))
    basis = Eigenbasis(
        mean=PlanarImage(rng.uniform(size=(height, width, channels)), space),
        components=q.T,
        eigenvalues=np.sort(rng.uniform(size=k))[::-1],
    )

    weights = rng.normal(size=(n, k, channels))
    if n_low:
        weights[:n_low, k_low:] = 0.0
        weights[n_low:, :k_low] = 0.0
    fac = np.column_stack([rng.normal(-0.5, 0.2, n), rng.normal(0, 0.2, n), rng.normal(-0.5, 0.2, n)])
    model = EigenGaussianModel(
        gaussians=GaussianCloud(logit(rng.uniform(0.1, 0.9, size=(n, 2))), fac),
        weights=weights,
        n_low=n_low,
        k_low=k_low,
        width=width,
        height=height,
        space=space,
    )
    return basis, model


def with_crc(payload: bytes) -> bytes:
    return payload + struct.pack("<I", zlib.crc32(payload))


class TestModelFileRoundTrip:
    """Test that EGS1 files reproduce the basis and model exactly."""

    @pytest.mark.parametrize("space", list(ColorSpace))
    def test_arrays_preserved(self, tmp_path, space):
        """Test that every array and count survives save and load."""
        basis, model = make_pair(space=space)
        bundle = load_model(save_model(tmp_path / "model.egs", basis, model))

        np.testing.assert_array_equal(bundle.basis.mean.data, basis.mean.data)
        np.testing.assert_array_equal(bundle.basis.components, basis.components)
        np.testing.assert_array_equal(bundle.basis.eigenvalues, basis.eigenvalues)
        np.testing.assert_array_equal(bundle.model.gaussians.pos_raw, model.gaussians.pos_raw)
        np.testing.assert_array_equal(bundle.model.gaussians.fac_raw, model.gaussians.fac_raw)
        np.testing.assert_array_equal(bundle.model.weights, model.weights)
        assert bundle.model.n_low == model.n_low
        assert bundle.model.k_low == model.k_low
        assert bundle.basis.space is space
        assert bundle.model.space is space

    def test_save_load_save_is_byte_identical(self, tmp_path):
        """Test that re-saving a loaded model reproduces the file."""
        basis, model = make_pair()
        first = save_model(tmp_path / "a.egs", basis, model).read_bytes()
        bundle = load_model(tmp_path / "a.egs")
        second = save_model(tmp_path / "b.egs", bundle.basis, bundle.model).read_bytes()
        assert first == second

    def test_renders_identical_after_load(self):
        """Test that a loaded model renders bit-identically."""
        basis, model = make_pair()
        bundle = decode_model(encode_model(basis, model))
        for before, after in zip(render_components(model), render_components(bundle.model)):
            np.testing.assert_array_equal(before.data, after.data)

    def test_undivided_model(self):
        """Test that models without a low-frequency set round-trip."""
        basis, model = make_pair(n_low=0, k_low=0)
        bundle = decode_model(encode_model(basis, model))
        assert not bundle.model.freq_learning

    def test_header_fields(self):
        """Test magic, version and dimensions at the start of the file."""
        basis, model = make_pair(space=ColorSpace.RGB)
        fields = HEADER.unpack_from(encode_model(basis, model), 0)
        assert fields == (b"EGS1", 1, 7, 5, 3, 3, 9, 2, 1, 1)


class TestModelFileRejection:
    """Test that damaged files raise ModelFormatError."""

    def test_flipped_byte(self):
        """Test that a payload bit flip is caught by the checksum."""
        data = bytearray(encode_model(*make_pair()))
        data[HEADER.size + 10] ^= 0x01
        with pytest.raises(ModelFormatError, match="CRC"):
            decode_model(bytes(data))

    def test_truncated(self):
        """Test that a short file is rejected."""
        data = encode_model(*make_pair())
        with pytest.raises(ModelFormatError):
            decode_model(data[:-9])
        with pytest.raises(ModelFormatError):
            decode_model(data[:10])

    def test_bad_magic(self):
        """Test that another file type is rejected."""
        data = encode_model(*make_pair())
        with pytest.raises(ModelFormatError, match="magic"):
            decode_model(with_crc(b"EGS2" + data[4:-4]))

    def test_unknown_version(self):
        """Test that a future version is rejected."""
        data = encode_model(*make_pair())
        with pytest.raises(ModelFormatError, match="version"):
            decode_model(with_crc(data[:4] + struct.pack("<I", 2) + data[8:-4]))

    def test_unknown_space_tag(self):
        """Test that an undefined color space tag is rejected."""
        data = bytearray(encode_model(*make_pair()))
        data[HEADER.size - 1] = 7
        with pytest.raises(ModelFormatError, match="space"):
            decode_model(with_crc(bytes(data[:-4])))

    def test_non_zero_cross_weight(self):
        """Test that a file violating the partition contract is rejected."""
        basis, model = make_pair()
        data = bytearray(encode_model(basis, model))
        # First weight entry belongs to Gaussian 0 (low), component 0; component 1 is cross.
        weights_offset = len(data) - 4 - model.weights.nbytes
        cross = weights_offset + 4 * model.channels
        data[cross:cross + 4] = struct.pack("<f", 1.0)
        with pytest.raises(ModelFormatError, match="content"):
            decode_model(with_crc(bytes(data[:-4])))

    def test_missing_file(self, tmp_path):
        """Test that a missing path raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_model(tmp_path / "absent.egs")
