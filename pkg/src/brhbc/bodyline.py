"""The body as an unbalanced lossy transmission line over earth ground.

The body path between the transmitter (Tx) and receiver (Rx) is a chain of
cylindrical segments above a ground plane. Each segment gets per-unit-length
R', L', G', C' from the single-wire-over-ground-plane closed forms, is
discretized into uniform cells and cascaded as ABCD (chain) matrices. The
wearables are capacitive couplers: a signal plate on the skin and a floating
ground plate whose only return path is its parasitic capacitance to earth.

All network functions are vectorized over frequency: ``f`` may be a scalar or
a 1-D array, and chain matrices carry a leading frequency axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .constants import C0, EPS0, ETA0, MU0
from .dielectrics import complex_permittivity, resolve_tissue, tissue_label


class NetworkError(ValueError):
    """Invalid geometry or an unsolvable network."""


# ---------------------------------------------------------------------------
# geometry and per-unit-length parameters


@dataclass(frozen=True)
class BodySegment:
    """Two-layer (skin over muscle) cylinder section running parallel to the ground."""

    length: float
    outer_radius: float
    skin_thickness: float
    height_above_ground: float
    tissue_outer: object = "skin"
    tissue_inner: object = "muscle"

    def __post_init__(self):
        for name in ("length", "outer_radius", "skin_thickness", "height_above_ground"):
            if not getattr(self, name) > 0:
                raise NetworkError(f"segment {name} must be > 0")
        if self.skin_thickness >= self.outer_radius:
            raise NetworkError("skin_thickness must be smaller than outer_radius")
        # fail early on unknown tissue labels
        object.__setattr__(self, "tissue_outer", resolve_tissue(self.tissue_outer))
        object.__setattr__(self, "tissue_inner", resolve_tissue(self.tissue_inner))

    @property
    def axis_height(self) -> float:
        return self.height_above_ground + self.outer_radius

    @property
    def inner_radius(self) -> float:
        return self.outer_radius - self.skin_thickness

    @property
    def cross_section(self) -> float:
        return np.pi * self.outer_radius**2

    def describe(self) -> dict:
        return {
            "length": self.length,
            "outer_radius": self.outer_radius,
            "skin_thickness": self.skin_thickness,
            "height_above_ground": self.height_above_ground,
            "tissue_outer": tissue_label(self.tissue_outer),
            "tissue_inner": tissue_label(self.tissue_inner),
        }


@dataclass(frozen=True)
class LineModel:
    """Tunables of the distributed body model.

    Attributes:
        radiation_coefficient: scale ``k`` of the per-unit-length radiation
            resistance ``k * eta0 * (beta0 * h_axis)**2 / h_axis``.
        body_loss_factor: fraction of the cylinder conduction resistance that
            acts as series loss on the guided mode.
        n_segments: number of cells along the Tx-Rx path.
    """

    radiation_coefficient: float = 0.3
    body_loss_factor: float = 0.3
    n_segments: int = 512

    def __post_init__(self):
        if self.radiation_coefficient < 0:
            raise NetworkError("radiation_coefficient must be >= 0")
        if not 0 <= self.body_loss_factor <= 1:
            raise NetworkError("body_loss_factor must lie in [0, 1]")
        if int(self.n_segments) < 1:
            raise NetworkError("n_segments must be >= 1")


@dataclass(frozen=True)
class PerUnitLengthParams:
    """R' (conduction), L', G', C' plus the radiation resistance of a line section.

    ``r`` is the bare conduction resistance of the cylinder; the series loss the
    line actually sees is ``loss_factor * r + r_rad``.
    """

    r: np.ndarray
    l: float
    g: np.ndarray
    c: float
    r_rad: np.ndarray = 0.0
    loss_factor: float = 1.0

    @property
    def v_p(self) -> float:
        return 1 / np.sqrt(self.l * self.c)

    @property
    def z0_lossless(self) -> float:
        return np.sqrt(self.l / self.c)

    @property
    def r_series(self):
        return self.loss_factor * np.asarray(self.r) + np.asarray(self.r_rad)

    def series_impedance(self, f):
        return self.r_series + 1j * 2 * np.pi * np.asarray(f, dtype=float) * self.l

    def shunt_admittance(self, f):
        return np.asarray(self.g) + 1j * 2 * np.pi * np.asarray(f, dtype=float) * self.c


def conduction_resistance(seg: BodySegment, f):
    """Conduction resistance per metre of the two-layer cylinder (ohm/m).

    Low-frequency value is the parallel conduction of skin shell and muscle
    core. Once the skin depth of the equivalent homogeneous conductor drops
    below the radius, the surface-limited value ``1/(sigma*2*pi*a*delta)``
    takes over; the two are combined as a root-sum-square, a smooth max.
    """
    f = np.asarray(f, dtype=float)
    a, ai = seg.outer_radius, seg.inner_radius
    _, s_out = complex_permittivity(seg.tissue_outer, f)
    _, s_in = complex_permittivity(seg.tissue_inner, f)
    g_dc = s_in * np.pi * ai**2 + s_out * np.pi * (a**2 - ai**2)
    r_dc = 1 / g_dc
    sigma_eq = g_dc / (np.pi * a**2)
    delta = np.sqrt(2 / (2 * np.pi * f * MU0 * sigma_eq))
    r_hf = 1 / (sigma_eq * 2 * np.pi * a * delta)
    return np.sqrt(r_dc**2 + r_hf**2)


def radiation_resistance(seg: BodySegment, f, coefficient: float):
    """Series resistance standing in for power radiated by the line (ohm/m).

    Follows the ``(beta0 * h)**2`` law of a two-conductor line radiating from
    its standing wave, normalized by the conductor height.
    """
    beta0 = 2 * np.pi * np.asarray(f, dtype=float) / C0
    h = seg.axis_height
    return coefficient * ETA0 * (beta0 * h) ** 2 / h


def pul_params(seg: BodySegment, f, model: Optional[LineModel] = None) -> PerUnitLengthParams:
    """Per-unit-length parameters of ``seg`` at frequency ``f``.

    L' and C' are the wire-over-ground-plane values with the air gap setting
    the external capacitance. G' is ``omega * C' * tan_delta`` where the loss
    tangent is that of the air gap in series with the skin shell.
    """
    model = model or LineModel()
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise NetworkError("frequency must be > 0")
    a, h = seg.outer_radius, seg.axis_height
    if h < a:
        raise NetworkError("axis height below the cylinder radius: geometry impossible")
    x = np.arccosh(h / a)
    l_pul = MU0 / (2 * np.pi) * x
    c_pul = 2 * np.pi * EPS0 / x
    if x == 0:
        raise NetworkError("cylinder touches the ground plane")

    w = 2 * np.pi * f
    y_air = 1j * w * c_pul
    eps_o, s_o = complex_permittivity(seg.tissue_outer, f)
    shell = 2 * np.pi / np.log(a / seg.inner_radius)
    y_skin = (s_o + 1j * w * EPS0 * eps_o) * shell
    y_series = y_air * y_skin / (y_air + y_skin)
    tan_d = y_series.real / y_series.imag
    g_pul = w * c_pul * tan_d

    return PerUnitLengthParams(
        r=conduction_resistance(seg, f),
        l=float(l_pul),
        g=g_pul,
        c=float(c_pul),
        r_rad=radiation_resistance(seg, f, model.radiation_coefficient),
        loss_factor=model.body_loss_factor,
    )


# ---------------------------------------------------------------------------
# two-port algebra


@dataclass(frozen=True)
class TwoPort:
    """ABCD matrix, shape ``(..., 2, 2)`` with a leading frequency axis if ``f`` is an array."""

    abcd: np.ndarray
    frequency: object

    def __post_init__(self):
        m = np.asarray(self.abcd, dtype=complex)
        if m.shape[-2:] != (2, 2):
            raise NetworkError("ABCD matrix must have trailing shape (2, 2)")
        object.__setattr__(self, "abcd", m)

    A = property(lambda self: self.abcd[..., 0, 0])
    B = property(lambda self: self.abcd[..., 0, 1])
    C = property(lambda self: self.abcd[..., 1, 0])
    D = property(lambda self: self.abcd[..., 1, 1])

    @property
    def determinant(self):
        return self.A * self.D - self.B * self.C

    def __matmul__(self, other: "TwoPort") -> "TwoPort":
        _check_same_frequency(self.frequency, other.frequency)
        return TwoPort(self.abcd @ other.abcd, self.frequency)

    def power(self, n: int) -> "TwoPort":
        return TwoPort(np.linalg.matrix_power(self.abcd, int(n)), self.frequency)

    def inverse(self) -> "TwoPort":
        m = self.abcd
        det = self.determinant[..., None, None]
        inv = np.stack([np.stack([m[..., 1, 1], -m[..., 0, 1]], -1),
                        np.stack([-m[..., 1, 0], m[..., 0, 0]], -1)], -2)
        return TwoPort(inv / det, self.frequency)

    @classmethod
    def identity(cls, f) -> "TwoPort":
        shape = np.shape(f)
        return cls(np.broadcast_to(np.eye(2, dtype=complex), shape + (2, 2)).copy(), f)

    @classmethod
    def series(cls, z, f) -> "TwoPort":
        z = np.broadcast_to(np.asarray(z, dtype=complex), np.shape(f))
        m = cls.identity(f).abcd
        m[..., 0, 1] = z
        return cls(m, f)

    @classmethod
    def shunt(cls, y, f) -> "TwoPort":
        y = np.broadcast_to(np.asarray(y, dtype=complex), np.shape(f))
        m = cls.identity(f).abcd
        m[..., 1, 0] = y
        return cls(m, f)


def _check_same_frequency(f1, f2):
    if f1 is f2:
        return
    a1, a2 = np.asarray(f1, dtype=float), np.asarray(f2, dtype=float)
    if a1.shape != a2.shape or not np.array_equal(a1, a2):
        raise NetworkError("cannot cascade two-ports evaluated at different frequencies")


def segment_twoport(pul: PerUnitLengthParams, dl: float, f) -> TwoPort:
    """Exact chain matrix of a uniform lossy line section of length ``dl``."""
    if not dl > 0:
        raise NetworkError("section length must be > 0")
    z = pul.series_impedance(f)
    y = pul.shunt_admittance(f)
    gamma = np.sqrt(z * y)
    z0 = np.sqrt(z / y)
    gl = gamma * dl
    ch, sh = np.cosh(gl), np.sinh(gl)
    m = np.empty(np.shape(gl) + (2, 2), dtype=complex)
    m[..., 0, 0] = ch
    m[..., 0, 1] = z0 * sh
    m[..., 1, 0] = sh / z0
    m[..., 1, 1] = ch
    return TwoPort(m, f)


def cascade(chain: Sequence[TwoPort]) -> TwoPort:
    """Ordered product of the chain matrices (first element nearest the source)."""
    chain = list(chain)
    if not chain:
        raise NetworkError("cannot cascade an empty chain")
    out = chain[0]
    for tp in chain[1:]:
        out = out @ tp
    return out


# ---------------------------------------------------------------------------
# devices, termination, ground coupling


@dataclass(frozen=True)
class DeviceGeometry:
    """Parallel-plate capacitive coupler (signal patch on skin, floating ground plate).

    ``ground_distance`` is the height of the ground plate above earth and
    ``skin_gap`` the dielectric gap between signal patch and tissue.
    """

    signal_plate_radius: float = 0.025
    plate_separation: float = 0.03
    ground_plate_area: float = np.pi * 0.025**2
    ground_plate_thickness: float = 0.005
    ground_distance: float = 0.2
    skin_gap: float = 1e-3
    gap_eps_r: float = 1.0

    def __post_init__(self):
        for name in ("signal_plate_radius", "plate_separation", "ground_plate_area",
                     "ground_plate_thickness", "ground_distance", "skin_gap"):
            if not getattr(self, name) > 0:
                raise NetworkError(f"device {name} must be > 0")
        if self.gap_eps_r < 1:
            raise NetworkError("gap_eps_r must be >= 1")

    @property
    def signal_plate_area(self) -> float:
        return np.pi * self.signal_plate_radius**2

    @property
    def coupling_capacitance(self) -> float:
        """Signal patch to tissue."""
        return EPS0 * self.gap_eps_r * self.signal_plate_area / self.skin_gap

    @property
    def plate_capacitance(self) -> float:
        """Signal plate to ground plate, in parallel with the device port."""
        return EPS0 * min(self.signal_plate_area, self.ground_plate_area) / self.plate_separation

    @property
    def return_capacitance(self) -> float:
        return return_path_capacitance(self, self.ground_distance)


def return_path_capacitance(dev: DeviceGeometry, ground_distance: float) -> float:
    """Floating ground plate to earth: disc self-capacitance plus a parallel-plate term."""
    if not ground_distance > 0:
        raise NetworkError("ground_distance must be > 0")
    a_eq = np.sqrt(dev.ground_plate_area / np.pi)
    return 8 * EPS0 * a_eq + EPS0 * dev.ground_plate_area / ground_distance


@dataclass(frozen=True)
class TerminationNetwork:
    """Receiver load ``R_L || C_L``; ``r_load=inf`` or ``c_load=None`` drops that element."""

    r_load: float = np.inf
    c_load: Optional[float] = 2.3e-12

    def __post_init__(self):
        has_r = np.isfinite(self.r_load)
        has_c = self.c_load is not None
        if not (has_r or has_c):
            raise NetworkError("termination needs at least one of R_L, C_L")
        if has_r and not self.r_load > 0:
            raise NetworkError("R_L must be > 0")
        if has_c and not self.c_load > 0:
            raise NetworkError("C_L must be > 0")

    def admittance(self, f):
        w = 2 * np.pi * np.asarray(f, dtype=float)
        y = np.zeros(np.shape(w), dtype=complex)
        if np.isfinite(self.r_load):
            y = y + 1 / self.r_load
        if self.c_load is not None:
            y = y + 1j * w * self.c_load
        return y

    def impedance(self, f):
        return 1 / self.admittance(f)


@dataclass(frozen=True)
class BodyGroundCoupling:
    """Extra body-to-earth capacitance not represented by the modeled segments.

    Spread along the body as equal per-cell shunts (``distributed=True``) or
    lumped at the middle of the Tx-Rx path.
    """

    c_b: float = 150e-12
    distributed: bool = True

    def __post_init__(self):
        if not self.c_b > 0:
            raise NetworkError("C_B must be > 0")

    def impedance(self, f):
        return 1 / (1j * 2 * np.pi * np.asarray(f, dtype=float) * self.c_b)


# ---------------------------------------------------------------------------
# channel assembly


@dataclass(frozen=True)
class BodyChannel:
    """Everything needed to evaluate the on-body Tx-to-Rx transfer function.

    ``path`` runs from Tx to Rx; ``tx_stub`` and ``rx_stub`` are open-ended
    body sections extending beyond the devices, each ordered outward from
    its device.
    """

    path: tuple
    dev_tx: DeviceGeometry = field(default_factory=DeviceGeometry)
    dev_rx: DeviceGeometry = field(default_factory=DeviceGeometry)
    termination: TerminationNetwork = field(default_factory=TerminationNetwork)
    coupling: BodyGroundCoupling = field(default_factory=BodyGroundCoupling)
    tx_stub: tuple = ()
    rx_stub: tuple = ()
    model: LineModel = field(default_factory=LineModel)

    def __post_init__(self):
        for name in ("path", "tx_stub", "rx_stub"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.path:
            raise NetworkError("body path needs at least one segment")

    @property
    def path_length(self) -> float:
        return sum(s.length for s in self.path)

    @property
    def total_length(self) -> float:
        return sum(s.length for s in self.path + self.tx_stub + self.rx_stub)

    @property
    def body_volume(self) -> float:
        return sum(s.cross_section * s.length for s in self.path + self.tx_stub + self.rx_stub)

    def total_ground_capacitance(self) -> float:
        """C_B plus the geometric C' of every modeled segment."""
        segs = self.path + self.tx_stub + self.rx_stub
        c_geo = sum(2 * np.pi * EPS0 / np.arccosh(s.axis_height / s.outer_radius) * s.length for s in segs)
        return self.coupling.c_b + c_geo

    def with_(self, **changes) -> "BodyChannel":
        return replace(self, **changes)

    def with_model(self, **changes) -> "BodyChannel":
        return replace(self, model=replace(self.model, **changes))

    def gain(self, f):
        return solve(self, f).gain


def _cells_per_segment(path: Sequence[BodySegment], n: int) -> list:
    """Split ``n`` cells over the path proportionally to length (largest remainder, >= 1 each)."""
    lengths = np.array([s.length for s in path])
    if n < len(path):
        n = len(path)
    raw = lengths / lengths.sum() * n
    counts = np.maximum(np.floor(raw).astype(int), 1)
    rest = n - counts.sum()
    order = np.argsort(-(raw - np.floor(raw)), kind="stable")
    i = 0
    while rest > 0:
        counts[order[i % len(order)]] += 1
        rest -= 1
        i += 1
    while rest < 0:
        j = int(np.argmax(counts))
        counts[j] -= 1
        rest += 1
    return [int(c) for c in counts]


@dataclass
class _Run:
    """``count`` identical cells of one body segment."""

    seg: BodySegment
    count: int
    dl: float
    half: TwoPort
    shunt: TwoPort

    @property
    def cell(self) -> TwoPort:
        return self.half @ self.shunt @ self.half


def _make_runs(segments, counts, ch: BodyChannel, f) -> list:
    w = 2 * np.pi * np.asarray(f, dtype=float)
    runs = []
    for seg, n in zip(segments, counts):
        dl = seg.length / n
        pul = pul_params(seg, f, ch.model)
        half = segment_twoport(pul, dl / 2, f)
        if ch.coupling.distributed:
            y = 1j * w * ch.coupling.c_b * dl / ch.total_length
        else:
            y = np.zeros_like(w, dtype=complex)
        runs.append(_Run(seg, n, dl, half, TwoPort.shunt(y, f)))
    return runs


def _stub_runs(stub, dl_ref, ch, f):
    counts = [max(1, int(np.ceil(s.length / dl_ref - 1e-9))) for s in stub]
    return _make_runs(stub, counts, ch, f)


def _chain_of(runs, f) -> TwoPort:
    out = TwoPort.identity(f)
    for run in runs:
        out = out @ run.cell.power(run.count)
    return out


def _open_stub_admittance(runs, f):
    if not runs:
        return np.zeros(np.shape(f), dtype=complex)
    m = _chain_of(runs, f)
    return m.C / m.A


def _split_path(runs, f, c_b):
    """Insert a lumped C_B shunt at the cell boundary closest to the path midpoint."""
    total = sum(r.count for r in runs)
    target = total // 2
    out, seen = [], 0
    w = 2 * np.pi * np.asarray(f, dtype=float)
    lump = TwoPort.shunt(1j * w * c_b, f)
    placed = False
    for run in runs:
        if not placed and seen + run.count >= target:
            k = target - seen
            if k > 0:
                out.append(replace(run, count=k))
            out.append(lump)
            if run.count - k > 0:
                out.append(replace(run, count=run.count - k))
            placed = True
        else:
            out.append(run)
        seen += run.count
    return out


@dataclass
class NetworkSolution:
    """Result of solving the Tx - body - Rx network at one or more frequencies.

    Voltages are phasors for the given source amplitude ``v_in``. ``profile``
    is only filled for scalar frequency with ``profile=True``.
    """

    frequency: object
    v_in: float
    gain: object
    v_rx: object
    source_current: object
    input_power: object
    load_power: object
    profile: Optional[dict] = None


def _branch_impedances(ch: BodyChannel, f):
    w = 2 * np.pi * np.asarray(f, dtype=float)
    tx, rx = ch.dev_tx, ch.dev_rx
    z_tx = 1 / (1j * w * tx.return_capacitance) + 1 / (1j * w * tx.coupling_capacitance)
    y_load = ch.termination.admittance(f) + 1j * w * rx.plate_capacitance
    z_load = 1 / y_load
    z_rx = 1 / (1j * w * rx.coupling_capacitance) + z_load + 1 / (1j * w * rx.return_capacitance)
    return z_tx, z_load, z_rx


def solve(ch: BodyChannel, f, v_in: float = 1.0, profile: bool = False) -> NetworkSolution:
    """Solve the network: source -> coupler -> body line -> coupler -> load.

    Returns the complex voltage gain ``V_Rx / V_in`` (voltage across the
    receiver load) along with source current and port powers.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise NetworkError("frequency must be > 0")
    n = int(ch.model.n_segments)
    counts = _cells_per_segment(ch.path, n)
    path_runs = _make_runs(ch.path, counts, ch, f_arr)
    dl_ref = ch.path_length / sum(counts)
    tx_runs = _stub_runs(ch.tx_stub, dl_ref, ch, f_arr)
    rx_runs = _stub_runs(ch.rx_stub, dl_ref, ch, f_arr)

    elements = path_runs if ch.coupling.distributed else _split_path(path_runs, f_arr, ch.coupling.c_b)
    line = TwoPort.identity(f_arr)
    for el in elements:
        line = line @ (el.cell.power(el.count) if isinstance(el, _Run) else el)

    z_tx, z_load, z_rx = _branch_impedances(ch, f_arr)
    y_txs = _open_stub_admittance(tx_runs, f_arr)
    y_rxs = _open_stub_admittance(rx_runs, f_arr)

    net = TwoPort.series(z_tx, f_arr) @ TwoPort.shunt(y_txs, f_arr) @ line @ TwoPort.shunt(y_rxs, f_arr)
    den = net.A * z_rx + net.B
    if np.any(~np.isfinite(den)) or np.any(np.abs(den) == 0):
        raise NetworkError("singular network")
    v_node_rx = v_in * z_rx / den
    i_rx = v_node_rx / z_rx
    v_rx = i_rx * z_load
    i_net = net.C * v_node_rx + net.D * i_rx
    w = 2 * np.pi * f_arr
    i_src = i_net + 1j * w * ch.dev_tx.plate_capacitance * v_in
    p_in = 0.5 * np.real(v_in * np.conj(i_src))
    p_load = 0.5 * np.abs(v_rx) ** 2 * np.real(1 / z_load)

    prof = None
    if profile:
        if f_arr.ndim != 0:
            raise NetworkError("current profile requires a scalar frequency")
        v_node_tx = v_in - i_net * z_tx
        prof = _profile(ch, elements, tx_runs, rx_runs, v_node_tx, v_node_rx, i_rx, y_rxs, float(f_arr))

    scalar = f_arr.ndim == 0
    cast = (lambda x: complex(x)) if scalar else (lambda x: x)
    castf = (lambda x: float(x)) if scalar else (lambda x: x)
    return NetworkSolution(
        frequency=f,
        v_in=v_in,
        gain=cast(v_rx / v_in) if v_in != 0 else cast(np.zeros_like(v_rx)),
        v_rx=cast(v_rx),
        source_current=cast(i_src),
        input_power=castf(p_in),
        load_power=castf(p_load),
        profile=prof,
    )


def _sample_run(run: _Run, state, sign, samples, z0):
    """Walk ``run`` cell by cell from its far end back towards ``state``'s end.

    ``state`` is the (V, I) vector at the far end of the run; returns the
    state at the near end and appends per-cell samples (far to near).
    """
    half, sh = run.half.abcd, run.shunt.abcd
    x = state
    for _ in range(run.count):
        x_mid_after = half @ x
        x_mid_before = sh @ x_mid_after
        x = half @ x_mid_before
        i_mid = 0.5 * (x_mid_after[1] + x_mid_before[1])
        samples.append((run, sign * i_mid, x_mid_after[0]))
    return x


def _profile(ch, elements, tx_runs, rx_runs, v_node_tx, v_node_rx, i_rx_branch, y_rxs, f):
    """Axial current and voltage at every cell centre, Tx stub end to Rx stub end."""
    # path: step backwards from the Rx node
    i_path_end = v_node_rx * (y_rxs + 0) + i_rx_branch
    x = np.array([v_node_rx, i_path_end], dtype=complex)
    path_samples = []
    for el in reversed(elements):
        if isinstance(el, _Run):
            x = _sample_run(el, x, +1, path_samples, None)
        else:
            x = el.abcd @ x
    path_samples.reverse()

    def stub(runs, v_node, sign):
        if not runs:
            return []
        # open end: V=1, I=0; scale afterwards
        xs = np.array([1.0 + 0j, 0j])
        samples = []
        for run in reversed(runs):
            xs = _sample_run(run, xs, sign, samples, None)
        k = v_node / xs[0]
        samples.reverse()  # device node outward
        return [(r, i * k, v * k) for r, i, v in samples]

    tx_s = stub(tx_runs, v_node_tx, -1)[::-1]  # outer end first
    rx_s = stub(rx_runs, v_node_rx, +1)
    all_s = tx_s + path_samples + rx_s
    dl = np.array([r.dl for r, _, _ in all_s])
    z = np.cumsum(dl) - dl / 2
    z = z - sum(s.length for s in ch.tx_stub)
    current = np.array([i for _, i, _ in all_s])
    voltage = np.array([v for _, _, v in all_s])
    seg_idx = [r.seg for r, _, _ in all_s]
    r_cond = np.array([float(conduction_resistance(s, f)) for s in seg_idx])
    area = np.array([s.cross_section for s in seg_idx])
    radius = np.array([s.outer_radius for s in seg_idx])
    sigma_eq = np.array([_sigma_eq(s, f) for s in seg_idx])
    return {
        "z": z,
        "dl": dl,
        "current": current,
        "voltage": voltage,
        "r_loss": ch.model.body_loss_factor * r_cond,
        "area": area,
        "radius": radius,
        "sigma": sigma_eq,
        "in_path": np.array([0] * len(tx_s) + [1] * len(path_samples) + [0] * len(rx_s), dtype=bool),
    }


def _sigma_eq(seg: BodySegment, f) -> float:
    a, ai = seg.outer_radius, seg.inner_radius
    _, s_out = complex_permittivity(seg.tissue_outer, f)
    _, s_in = complex_permittivity(seg.tissue_inner, f)
    return float((s_in * ai**2 + s_out * (a**2 - ai**2)) / a**2)


def transfer_function(
    body: Sequence[BodySegment],
    dev_tx: DeviceGeometry,
    dev_rx: DeviceGeometry,
    term: TerminationNetwork,
    bg: BodyGroundCoupling,
    f,
    n_segments: int = 512,
    *,
    tx_stub: Sequence[BodySegment] = (),
    rx_stub: Sequence[BodySegment] = (),
    model: Optional[LineModel] = None,
):
    """Complex voltage gain ``V_Rx / V_in`` of the on-body channel at ``f``."""
    if int(n_segments) < 1:
        raise NetworkError("n_segments must be >= 1")
    model = replace(model or LineModel(), n_segments=int(n_segments))
    ch = BodyChannel(tuple(body), dev_tx, dev_rx, term, bg, tuple(tx_stub), tuple(rx_stub), model)
    return solve(ch, f).gain


def uniform_line_abcd(pul: PerUnitLengthParams, length: float, f) -> np.ndarray:
    """Closed-form chain matrix of a uniform line; used as an oracle for :func:`cascade`."""
    z = pul.series_impedance(f)
    y = pul.shunt_admittance(f)
    gamma = np.sqrt(z * y)
    zc = np.sqrt(z / y)
    gl = gamma * length
    return np.array([[np.cosh(gl), zc * np.sinh(gl)], [np.sinh(gl) / zc, np.cosh(gl)]])


def first_resonance(pul: PerUnitLengthParams, length: float, f_lo: float, f_hi: float, n: int = 400,
                    segments: int = 64) -> float:
    """Lowest frequency where the open-ended line's ``A = cos(beta*l)`` crosses zero.

    The chain matrix is built by cascading ``segments`` sections, so this
    exercises the cascade path rather than the closed form.
    """
    from scipy.optimize import brentq

    def a_elem(freq):
        tp = segment_twoport(pul, length / segments, freq).power(segments)
        return float(np.real(tp.A))

    grid = np.linspace(f_lo, f_hi, n)
    vals = [a_elem(x) for x in grid]
    for k in range(len(grid) - 1):
        if vals[k] == 0:
            return float(grid[k])
        if vals[k] * vals[k + 1] < 0:
            return float(brentq(a_elem, grid[k], grid[k + 1], xtol=1e-6, rtol=1e-14))
    raise NetworkError("no resonance in the search interval")
