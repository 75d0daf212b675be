"""Exact sawtooth accounting of the age-of-information process.

The age of a source grows at slope one and drops to (delivery time -
generation time) whenever a fresher update is delivered. Between two
accounting points the area under the sawtooth is a closed-form trapezoid,
so no time discretization is involved. The simulation core inlines the
same formula; this class is the reference implementation used to
reconstruct ages from event traces.
"""

from __future__ import annotations


def area_piece(anchor: float, timestamp: float, t: float) -> float:
    """Area under the age between `anchor` and `t`.

    `timestamp` is the generation time of the newest delivered update, so
    the age runs from (anchor - timestamp) to (t - timestamp) with slope 1.
    """
    age_end = t - timestamp
    age_start = anchor - timestamp
    return 0.5 * (age_end * age_end - age_start * age_start)


class AoiTracker:
    """Per-source age integrator over delivery events.

    The age starts at zero at `start_time`. Deliveries must arrive in
    generation order and in delivery-time order; anything else is an
    internal sequencing bug and raises.
    """

    def __init__(self, start_time: float = 0.0):
        self.start_time = start_time
        self.timestamp = start_time  # generation time of newest delivered update
        self.anchor = start_time  # last accounting instant
        self.area = 0.0
        self.deliveries = 0

    def record_delivery(self, t: float, generation_time: float) -> float:
        """Account one delivery; returns the area piece it closes."""
        if t < self.anchor:
            raise RuntimeError(
                f"delivery at {t} precedes previous accounting point {self.anchor}"
            )
        if generation_time < self.timestamp:
            raise RuntimeError(
                f"stale delivery: generation {generation_time} older than {self.timestamp}"
            )
        if generation_time > t:
            raise RuntimeError(f"delivery at {t} of a packet generated later ({generation_time})")
        piece = area_piece(self.anchor, self.timestamp, t)
        self.area += piece
        self.timestamp = generation_time
        self.anchor = t
        self.deliveries += 1
        return piece

    def close(self, t: float) -> float:
        """Total area up to `t`, including the open partial piece."""
        if t < self.anchor:
            raise RuntimeError(f"close time {t} precedes accounting point {self.anchor}")
        return self.area + area_piece(self.anchor, self.timestamp, t)

    def average_age(self, t: float) -> float:
        if t <= self.start_time:
            raise RuntimeError("no elapsed time to average over")
        return self.close(t) / (t - self.start_time)
