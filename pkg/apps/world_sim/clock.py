"""
Simulation Clock
"""

from apps.core.exceptions import ScenarioError


class SimClock:
    """Tick counter; time is derived from the tick index so it never drifts."""

    def __init__(self, dt, t0=0.0):
        if dt <= 0:
            raise ScenarioError('dt must be positive.')
        self.dt = float(dt)
        self.t0 = float(t0)
        self.tick = 0

    @property
    def t_cur(self):
        return self.t0 + self.tick * self.dt

    def advance(self):
        self.tick += 1
        return self.t_cur

    def __repr__(self):
        return f'SimClock(tick={self.tick}, t={self.t_cur:.3f})'
