"""
Counter-based Brownian increments

Every increment is a pure function of (seed, particle, step): the Philox
block at counter ``particle + step·2⁶⁴`` under a key derived from the seed
supplies four uniforms, which Box-Muller turns into the three Gaussian
components. No state is carried between calls, so results do not depend on
call order, batching or threads.
"""
import math

import numpy as np

_MANTISSA_SHIFT = np.uint64(11)
_MANTISSA_SCALE = 2.0 ** -53


class NoiseSource:
    """
    Brownian increments ΔB ~ N(0, dt I₃) keyed by particle and step index
    """

    def __init__(self, seed, dt):
        if not dt > 0:
            raise ValueError("dt must be positive, got {}".format(dt))
        self.seed = seed
        self.dt = dt
        self._key = np.random.SeedSequence(seed).generate_state(
            2, dtype=np.uint64)

    def uniforms(self, step, start, count):
        """
        Four uniforms in [0, 1) per particle, shape (count, 4)
        """
        if step < 0 or start < 0:
            raise ValueError("step and particle indices must be nonnegative")
        bitgen = np.random.Philox(key=self._key,
                                  counter=int(start) + (int(step) << 64))
        raw = bitgen.random_raw(4 * count).reshape(count, 4)
        return (raw >> _MANTISSA_SHIFT).astype(float) * _MANTISSA_SCALE

    def increments(self, step, start, count):
        """
        Increments of particles ``start .. start + count - 1`` at `step`,
        shape (count, 3)
        """
        u = self.uniforms(step, start, count)
        first = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        second = np.sqrt(-2.0 * np.log1p(-u[:, 2]))
        normals = np.stack([
            first * np.cos(2.0 * math.pi * u[:, 1]),
            first * np.sin(2.0 * math.pi * u[:, 1]),
            second * np.cos(2.0 * math.pi * u[:, 3]),
        ], axis=-1)
        return math.sqrt(self.dt) * normals

    def increment(self, particle, step):
        return self.increments(step, particle, 1)[0]

    def __repr__(self):
        return "NoiseSource(seed={!r}, dt={!r})".format(self.seed, self.dt)
