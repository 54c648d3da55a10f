"""Analytic incompressible Navier-Stokes-Fourier reference solutions on the
channel, for the three accommodation regimes.

The channel reduction is exact: a unidirectional tangential flow u2(x1) has
no self-advection, so the steady momentum balance is sigma u2'' = -Phi2 and
the steady heat balance is kappa theta'' = 0 (theta is the total temperature
fluctuation theta_g, the quantity the kinetic g-field converges to).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REGIMES = ("dirichlet", "navier", "perfect-slip")


@dataclass
class ChannelSolution:
    """Closed-form channel profiles with their boundary-condition regime."""

    regime: str
    H: float
    sigma: float
    kappa: float
    phi2: float
    theta_w_minus: float
    theta_w_plus: float
    lam: float | None = None
    flag: str | None = None  # "no-steady-solution" | "adiabatic-degenerate"

    def velocity(self, x: np.ndarray) -> np.ndarray:
        """Tangential velocity u2(x1)."""
        if self.flag == "no-steady-solution":
            raise ValueError("perfect slip with forcing has no steady state")
        x = np.asarray(x, dtype=float)
        poiseuille = 0.5 * self.phi2 / self.sigma * (self.H**2 - x**2)
        if self.regime == "dirichlet":
            return poiseuille
        return poiseuille + self.phi2 * self.H / self.lam

    def temperature(self, x: np.ndarray) -> np.ndarray:
        """Total temperature fluctuation theta_g(x1) = A x + B."""
        x = np.asarray(x, dtype=float)
        A, B = self.temperature_coefficients()
        return A * x + B

    def temperature_coefficients(self) -> tuple[float, float]:
        delta = 0.5 * (self.theta_w_plus - self.theta_w_minus)
        mean = 0.5 * (self.theta_w_plus + self.theta_w_minus)
        if self.regime == "dirichlet":
            return delta / self.H, mean
        if self.regime == "perfect-slip":
            return 0.0, mean
        A = delta / (self.H + 5.0 * self.kappa / (4.0 * self.lam))
        return A, mean


def channel_velocity(sigma: float, phi2: float, H: float, regime: str,
                     lam: float | None = None) -> ChannelSolution:
    """Steady tangential velocity for sigma u2'' = -phi2 under the regime BC.

    dirichlet: u2(+-H) = 0; navier(lam): sigma du2/dn + lam u2 = 0 at both
    walls, giving the Poiseuille profile shifted by the slip velocity
    phi2 H / lam.  Perfect slip (lam = 0) with phi2 != 0 admits no steady
    momentum balance and is returned flagged.
    """
    if sigma <= 0 or H <= 0:
        raise ValueError("need sigma > 0 and H > 0")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    flag = None
    if regime == "navier":
        if lam is None or lam <= 0:
            raise ValueError("navier regime needs lam > 0")
    if regime == "perfect-slip":
        lam = 0.0
        if phi2 != 0.0:
            flag = "no-steady-solution"
    return ChannelSolution(regime=regime, H=H, sigma=sigma, kappa=1.0,
                           phi2=phi2, theta_w_minus=0.0, theta_w_plus=0.0,
                           lam=lam, flag=flag)


def channel_temperature(kappa: float, theta_w_minus: float, theta_w_plus: float,
                        H: float, regime: str, lam: float | None = None) -> ChannelSolution:
    """Steady linear temperature profile theta = A x + B for kappa theta'' = 0.

    dirichlet: theta(+-H) = theta_w(+-H).  navier(lam): the Robin condition
    kappa d theta/dn + (4/5) lam (theta - theta_w) = 0 at both walls gives
    A = (theta_w(+) - theta_w(-))/2 / (H + 5 kappa / (4 lam)) and B the mean
    wall temperature.  Perfect slip leaves the mean undetermined; the mean
    wall temperature convention is returned with the degeneracy flagged.
    """
    if kappa <= 0:
        raise ValueError("need kappa > 0")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    flag = None
    if regime == "navier" and (lam is None or lam <= 0):
        raise ValueError("navier regime needs lam > 0")
    if regime == "perfect-slip":
        lam = 0.0
        flag = "adiabatic-degenerate"
    return ChannelSolution(regime=regime, H=H, sigma=1.0, kappa=kappa,
                           phi2=0.0, theta_w_minus=theta_w_minus,
                           theta_w_plus=theta_w_plus, lam=lam, flag=flag)


def channel_reference(sigma: float, kappa: float, phi2: float,
                      theta_w_minus: float, theta_w_plus: float, H: float,
                      regime: str, lam: float | None = None) -> ChannelSolution:
    """Combined velocity + temperature reference for one regime."""
    vel = channel_velocity(sigma, phi2, H, regime, lam)
    tem = channel_temperature(kappa, theta_w_minus, theta_w_plus, H, regime, lam)
    return ChannelSolution(regime=regime, H=H, sigma=sigma, kappa=kappa,
                           phi2=phi2, theta_w_minus=theta_w_minus,
                           theta_w_plus=theta_w_plus, lam=lam,
                           flag=vel.flag or tem.flag)


def profiles_csv(sol: ChannelSolution, n_points: int = 101) -> str:
    """CSV rows (x1, u2, theta) sampled across the channel."""
    x = np.linspace(-sol.H, sol.H, n_points)
    u = sol.velocity(x)
    th = sol.temperature(x)
    lines = ["x1,u2,theta"]
    lines += [f"{xi:.12g},{ui:.12g},{ti:.12g}" for xi, ui, ti in zip(x, u, th)]
    return "\n".join(lines) + "\n"
