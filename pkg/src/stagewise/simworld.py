"""Deterministic 2D multi-stage manipulation world with two render domains.

The arena is the unit square (x right, y down). A gripper moves under
velocity control, opens/closes its fingers, and can attach to the single
movable object ("cup") or to a drawer handle. Two scenarios are registered:

* ``coffee-analog`` (3 stages): pick up the cup, seat it in the machine's
  slot, hold position over the machine button until it is depressed.
* ``drawer-analog`` (5 stages): grasp the drawer handle, slide the drawer
  open, move clear, pick the cup out of the tray, place it on the cabinet
  top without toppling it.

Every state renders in two domains. The "demonstrator" domain is drawn
directly; the "robot" domain is exactly ``style_map_apply`` of the
demonstrator image (a fixed invertible per-channel affine color transform),
which doubles as ground truth for translation quality. Hidden world state is
only for the oracle responder and tests; learners see pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

ARENA_DT = 0.05
VEL_CMD_MAX = 2.0  # per-component clamp; one step moves at most 0.1 arena units per axis
APERTURE_STEP = 0.6  # aperture change per unit command per step
GRASP_RADIUS = 0.07
GRASP_CLOSE = 0.45
GRASP_OPEN = 0.55
TOPPLE_SPEED = 0.06  # per-step displacement above which a released cup falls over
EPISODE_STEPS = 30

ACTION_LOW = np.array([-VEL_CMD_MAX, -VEL_CMD_MAX, -1.0])
ACTION_HIGH = np.array([VEL_CMD_MAX, VEL_CMD_MAX, 1.0])

# fixed invertible per-channel affine: robot = STYLE_A * demo + STYLE_B
STYLE_A = np.array([0.55, 0.80, 0.65])
STYLE_B = np.array([0.42, 0.05, 0.30])


class SimError(Exception):
    pass


class DemoScriptError(SimError):
    pass


@dataclass(frozen=True)
class Action:
    vx: float
    vy: float
    aperture: float

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.aperture])

    @staticmethod
    def from_array(a) -> "Action":
        a = np.asarray(a, dtype=float).reshape(3)
        return Action(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class WorldState:
    scenario: str
    gripper: tuple[float, float]
    aperture: float
    held: str | None
    cup: tuple[float, float]
    cup_upright: bool
    cup_riding: bool  # drawer scenario: cup is sitting in the tray
    articulation: float  # button depression (coffee) / drawer openness (drawer)


# -- geometry ------------------------------------------------------------------

COFFEE = {
    "machine": (0.66, 0.92, 0.08, 0.38),  # x0,x1,y0,y1
    "slot": (0.79, 0.31),
    "slot_radius": 0.055,
    "button": (0.79, 0.135),
    "button_rect": (0.735, 0.845, 0.085, 0.185),
    "press_point": (0.79, 0.245),
    "press_radius": 0.10,
    "cup_box": (0.12, 0.45, 0.50, 0.80),
    "home": (0.15, 0.15),
    "home_jitter": 0.03,
    "home_radius": 0.10,
}

DRAWER = {
    "cabinet": (0.60, 0.95, 0.15, 0.45),
    "top_point": (0.775, 0.235),
    "top_radius": 0.07,
    "slide_len": 0.25,
    "tray_x": (0.63, 0.92),
    "handle_x": 0.775,
    "cup_offset_y": 0.08,  # cup sits this far behind the tray front
    "clear_zone": (0.05, 0.45, 0.05, 0.45),
    "home": (0.15, 0.15),
    "home_jitter": 0.03,
    "home_radius": 0.10,
}


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _in_box(p: tuple[float, float], box: tuple[float, float, float, float], pad: float = 0.0) -> bool:
    x0, x1, y0, y1 = box
    return (x0 - pad) <= p[0] <= (x1 + pad) and (y0 - pad) <= p[1] <= (y1 + pad)


def _tray_front(openness: float) -> float:
    return 0.45 + DRAWER["slide_len"] * openness


def _handle_pos(openness: float) -> tuple[float, float]:
    return (DRAWER["handle_x"], _tray_front(openness) + 0.02)


def _tray_cup_pos(openness: float, jitter_x: float) -> tuple[float, float]:
    return (DRAWER["handle_x"] + jitter_x, _tray_front(openness) - DRAWER["cup_offset_y"])


def _cup_hidden(state: WorldState) -> bool:
    return state.scenario == "drawer-analog" and state.cup_riding and state.articulation < 0.5


# -- stage predicates ----------------------------------------------------------


def _coffee_predicates() -> list[Callable[[WorldState], bool]]:
    g = COFFEE

    def p0(s: WorldState) -> bool:
        return (
            s.held is None
            and s.aperture >= 0.9
            and s.cup_upright
            and _in_box(s.cup, g["cup_box"], pad=0.06)
            and _dist(s.gripper, g["home"]) <= g["home_radius"]
            and s.articulation <= 0.1
        )

    def p1(s: WorldState) -> bool:
        return s.held == "cup"

    def p2(s: WorldState) -> bool:
        return s.held is None and s.cup_upright and _dist(s.cup, g["slot"]) <= g["slot_radius"]

    def p3(s: WorldState) -> bool:
        return p2(s) and _dist(s.gripper, g["press_point"]) <= g["press_radius"]

    return [p0, p1, p2, p3]


def _drawer_predicates() -> list[Callable[[WorldState], bool]]:
    g = DRAWER

    def p0(s: WorldState) -> bool:
        return (
            s.articulation <= 0.1
            and s.held is None
            and s.aperture >= 0.9
            and s.cup_riding
            and s.cup_upright
            and _dist(s.gripper, g["home"]) <= g["home_radius"]
        )

    def p1(s: WorldState) -> bool:
        return s.held == "handle"

    def p2(s: WorldState) -> bool:
        return s.articulation >= 0.8

    def p3(s: WorldState) -> bool:
        x0, x1, y0, y1 = g["clear_zone"]
        return s.articulation >= 0.8 and s.held is None and x0 <= s.gripper[0] <= x1 and y0 <= s.gripper[1] <= y1

    def p4(s: WorldState) -> bool:
        return s.articulation >= 0.8 and s.held == "cup"

    def p5(s: WorldState) -> bool:
        return s.held is None and s.cup_upright and _dist(s.cup, g["top_point"]) <= g["top_radius"]

    return [p0, p1, p2, p3, p4, p5]


# -- scenario registry ----------------------------------------------------------


@dataclass
class ScenarioSpec:
    name: str
    stages: int
    instruction_frames: tuple[int, ...]  # t_1..t_S; t_0 is always frame 0
    predicates: list[Callable[[WorldState], bool]]
    settings: tuple[str, ...]


def _coffee_settings() -> tuple[str, ...]:
    return (
        "default",
        "cup-shifted",
        "cup-in-gripper",
        "cup-near-machine",
        "cup-in-machine",
        "gripper-at-button",
    )


def _drawer_settings() -> tuple[str, ...]:
    return (
        "default",
        "near-handle",
        "handle-grasped",
        "drawer-half",
        "drawer-open",
        "gripper-clear-open",
        "cup-in-gripper-open",
        "cup-out-mid",
        "cup-on-top",
        "drawer-open-gripper-far",
        "drawer-ajar",
    )


SCENARIOS: dict[str, ScenarioSpec] = {
    "coffee-analog": ScenarioSpec(
        name="coffee-analog",
        stages=3,
        instruction_frames=(9, 18, 30),
        predicates=_coffee_predicates(),
        settings=_coffee_settings(),
    ),
    "drawer-analog": ScenarioSpec(
        name="drawer-analog",
        stages=5,
        instruction_frames=(8, 12, 17, 23, 30),
        predicates=_drawer_predicates(),
        settings=_drawer_settings(),
    ),
}


def get_scenario(name: str) -> ScenarioSpec:
    if name not in SCENARIOS:
        raise SimError(f"unknown scenario {name!r}; registered: {sorted(SCENARIOS)}")
    return SCENARIOS[name]


def stage_predicate(state: WorldState, stage: int) -> bool:
    spec = get_scenario(state.scenario)
    if not (0 <= stage <= spec.stages):
        raise SimError(f"stage {stage} out of range [0, {spec.stages}] for {state.scenario}")
    return spec.predicates[stage](state)


# -- reset / step ---------------------------------------------------------------


def reset(seed: int, scenario: str) -> WorldState:
    spec = get_scenario(scenario)
    rng = np.random.default_rng(seed)
    if spec.name == "coffee-analog":
        g = COFFEE
        home = (
            g["home"][0] + rng.uniform(-g["home_jitter"], g["home_jitter"]),
            g["home"][1] + rng.uniform(-g["home_jitter"], g["home_jitter"]),
        )
        x0, x1, y0, y1 = g["cup_box"]
        cup = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        return WorldState(spec.name, home, 1.0, None, cup, True, False, 0.0)
    g = DRAWER
    home = (
        g["home"][0] + rng.uniform(-g["home_jitter"], g["home_jitter"]),
        g["home"][1] + rng.uniform(-g["home_jitter"], g["home_jitter"]),
    )
    jitter = rng.uniform(-0.04, 0.04)
    cup = _tray_cup_pos(0.0, jitter)
    return WorldState(spec.name, home, 1.0, None, cup, True, True, 0.0)


def step(state: WorldState, action: Action | np.ndarray) -> WorldState:
    if not isinstance(action, Action):
        action = Action.from_array(action)
    vx = float(np.clip(action.vx, -VEL_CMD_MAX, VEL_CMD_MAX))
    vy = float(np.clip(action.vy, -VEL_CMD_MAX, VEL_CMD_MAX))
    ap_cmd = float(np.clip(action.aperture, -1.0, 1.0))

    gx, gy = state.gripper
    held = state.held
    articulation = state.articulation
    cup = state.cup
    cup_riding = state.cup_riding
    cup_upright = state.cup_upright

    if held == "handle":
        # dragging the drawer: motion is projected on the slide axis (+y)
        d_open = (vy * ARENA_DT) / DRAWER["slide_len"]
        articulation = float(np.clip(articulation + d_open, 0.0, 1.0))
        gx, gy = _handle_pos(articulation)
        speed = abs(d_open) * DRAWER["slide_len"]
    else:
        nx = float(np.clip(gx + vx * ARENA_DT, 0.0, 1.0))
        ny = float(np.clip(gy + vy * ARENA_DT, 0.0, 1.0))
        speed = math.hypot(nx - gx, ny - gy)
        gx, gy = nx, ny

    aperture = float(np.clip(state.aperture + ap_cmd * APERTURE_STEP, 0.0, 1.0))

    # cup rides the tray while unheld and seated in it
    if state.scenario == "drawer-analog" and cup_riding and held != "cup":
        cup = _tray_cup_pos(articulation, cup[0] - DRAWER["handle_x"])

    if held == "cup":
        cup = (gx, gy)
        cup_upright = True

    # release
    if held is not None and aperture >= GRASP_OPEN:
        if held == "cup":
            cup_upright = speed <= TOPPLE_SPEED
            if state.scenario == "drawer-analog":
                x0, x1 = DRAWER["tray_x"]
                front = _tray_front(articulation)
                cup_riding = x0 <= cup[0] <= x1 and 0.45 <= cup[1] <= front + 0.02
            else:
                cup_riding = False
        held = None

    # grasp
    if held is None and aperture <= GRASP_CLOSE:
        if state.scenario == "drawer-analog" and _dist((gx, gy), _handle_pos(articulation)) <= GRASP_RADIUS:
            held = "handle"
            gx, gy = _handle_pos(articulation)
        elif _dist((gx, gy), cup) <= GRASP_RADIUS and not _cup_hidden(state):
            reachable = state.scenario != "drawer-analog" or not cup_riding or articulation >= 0.5
            if reachable:
                held = "cup"
                cup = (gx, gy)
                cup_riding = False
                cup_upright = True

    # coffee button depresses while the gripper holds position over it
    if state.scenario == "coffee-analog":
        if _dist((gx, gy), COFFEE["press_point"]) <= COFFEE["press_radius"]:
            articulation = float(np.clip(articulation + 0.16, 0.0, 1.0))
        else:
            articulation = float(np.clip(articulation - 0.16, 0.0, 1.0))

    return WorldState(state.scenario, (gx, gy), aperture, held, cup, cup_upright, cup_riding, articulation)


# -- rendering -------------------------------------------------------------------

_DEMO_COLORS = {
    "background": (0.95, 0.92, 0.82),
    "agent": (0.85, 0.52, 0.28),
    "finger": (0.62, 0.34, 0.16),
    "cup": (0.75, 0.10, 0.12),
    "cup_toppled": (0.52, 0.08, 0.10),
    "machine": (0.25, 0.28, 0.33),
    "slot": (0.10, 0.10, 0.14),
    "button_hi": (0.15, 0.68, 0.20),
    "button_lo": (0.04, 0.22, 0.07),
    "cabinet": (0.55, 0.38, 0.20),
    "cabinet_top": (0.62, 0.45, 0.26),
    "tray": (0.68, 0.52, 0.30),
    "handle": (0.12, 0.12, 0.14),
}


def style_map_apply(img: np.ndarray) -> np.ndarray:
    """Demonstrator pixels -> robot pixels (exact, invertible)."""
    return img * STYLE_A + STYLE_B


def style_map_invert(img: np.ndarray) -> np.ndarray:
    return (img - STYLE_B) / STYLE_A


def _fill(img: np.ndarray, x0: float, x1: float, y0: float, y1: float, color) -> None:
    n = img.shape[0]
    c0 = max(int(math.floor(x0 * n)), 0)
    c1 = min(int(math.ceil(x1 * n)), n)
    r0 = max(int(math.floor(y0 * n)), 0)
    r1 = min(int(math.ceil(y1 * n)), n)
    if c1 > c0 and r1 > r0:
        img[r0:r1, c0:c1] = color


def _fill_centered(img: np.ndarray, cx: float, cy: float, half_w: float, half_h: float, color) -> None:
    _fill(img, cx - half_w, cx + half_w, cy - half_h, cy + half_h, color)


def render(state: WorldState, domain: str, size: int = 32) -> np.ndarray:
    """Render a state to an HxWx3 float image in [0,1] for one domain."""
    if domain not in ("demonstrator", "robot"):
        raise SimError(f"unknown domain {domain!r}")
    c = _DEMO_COLORS
    img = np.empty((size, size, 3))
    img[:] = c["background"]

    if state.scenario == "coffee-analog":
        g = COFFEE
        _fill(img, *g["machine"], c["machine"])
        bx0, bx1, by0, by1 = g["button_rect"]
        t = state.articulation
        btn = tuple((1 - t) * h + t * l for h, l in zip(c["button_hi"], c["button_lo"]))
        _fill(img, bx0, bx1, by0, by1, btn)
        sx, sy = g["slot"]
        _fill_centered(img, sx, sy, 0.055, 0.045, c["slot"])
    else:
        g = DRAWER
        front = _tray_front(state.articulation)
        tx0, tx1 = g["tray_x"]
        if front > 0.455:
            _fill(img, tx0, tx1, 0.45, front, c["tray"])
        _fill(img, *g["cabinet"], c["cabinet"])
        topx, topy = g["top_point"]
        _fill_centered(img, topx, topy, 0.10, 0.055, c["cabinet_top"])
        hx, hy = _handle_pos(state.articulation)
        _fill_centered(img, hx, hy, 0.045, 0.018, c["handle"])

    if not _cup_hidden(state) and state.held != "cup":
        cx, cy = state.cup
        if state.cup_upright:
            _fill_centered(img, cx, cy, 0.035, 0.05, c["cup"])
        else:
            _fill_centered(img, cx, cy, 0.06, 0.025, c["cup_toppled"])

    # agent drawn last, on top
    gx, gy = state.gripper
    _fill_centered(img, gx, gy, 0.055, 0.04, c["agent"])
    spread = 0.02 + 0.045 * state.aperture
    _fill_centered(img, gx - spread, gy + 0.055, 0.016, 0.035, c["finger"])
    _fill_centered(img, gx + spread, gy + 0.055, 0.016, 0.035, c["finger"])
    if state.held == "cup":
        _fill_centered(img, gx, gy + 0.055, 0.03, 0.042, c["cup"])

    if domain == "robot":
        img = style_map_apply(img)
    return img


# -- trajectories -----------------------------------------------------------------


@dataclass
class Trajectory:
    scenario: str
    domain: str
    seed: int
    observations: list[np.ndarray]
    actions: list[np.ndarray]
    states: list[WorldState] = field(default_factory=list)
    source: str = ""

    def __post_init__(self) -> None:
        if len(self.actions) and len(self.observations) != len(self.actions) + 1:
            raise SimError(
                f"inconsistent lengths: {len(self.observations)} observations, {len(self.actions)} actions"
            )

    def obs_array(self) -> np.ndarray:
        return np.stack(self.observations)

    def act_array(self) -> np.ndarray:
        return np.stack(self.actions) if self.actions else np.zeros((0, 3))

    def __len__(self) -> int:
        return len(self.actions)


class Env:
    """Mutable handle over the pure step/render functions."""

    def __init__(self, scenario: str, size: int = 32):
        self.spec = get_scenario(scenario)
        self.size = size
        self.state: WorldState | None = None

    def reset(self, seed: int) -> WorldState:
        self.state = reset(seed, self.spec.name)
        return self.state

    def set_state(self, state: WorldState) -> None:
        self.state = state

    def step(self, action) -> WorldState:
        assert self.state is not None, "reset() first"
        self.state = step(self.state, action)
        return self.state

    def render(self, domain: str = "robot") -> np.ndarray:
        assert self.state is not None, "reset() first"
        return render(self.state, domain, self.size)


# -- scripted demonstrations ---------------------------------------------------


def _segment(target: tuple[float, float], start: tuple[float, float], steps: int) -> list[Action]:
    acts = []
    x, y = start
    for k in range(steps):
        frac_left = steps - k
        vx = (target[0] - x) / (frac_left * ARENA_DT)
        vy = (target[1] - y) / (frac_left * ARENA_DT)
        vx = float(np.clip(vx, -VEL_CMD_MAX, VEL_CMD_MAX))
        vy = float(np.clip(vy, -VEL_CMD_MAX, VEL_CMD_MAX))
        acts.append(Action(vx, vy, 0.0))
        x += vx * ARENA_DT
        y += vy * ARENA_DT
    return acts


def _demo_actions(state0: WorldState) -> list[Action]:
    if state0.scenario == "coffee-analog":
        g = COFFEE
        acts: list[Action] = []
        acts += _segment(state0.cup, state0.gripper, 8)
        acts.append(Action(0.0, 0.0, -1.0))  # close, grasp at frame 9
        acts += _segment(g["slot"], state0.cup, 8)
        acts.append(Action(0.0, 0.0, 1.0))  # release in the slot, frame 18
        acts += _segment(g["press_point"], g["slot"], 7)
        acts += [Action(0.0, 0.0, 0.0)] * 5  # hold over the button; it depresses
        return acts
    g = DRAWER
    acts = []
    handle0 = _handle_pos(0.0)
    acts += _segment(handle0, state0.gripper, 7)
    acts.append(Action(0.0, 0.0, -1.0))  # grasp handle at frame 8
    pull = 0.3 * DRAWER["slide_len"] / ARENA_DT
    acts += [Action(0.0, pull, 0.0)] * 4  # slide open, frames 9-12
    acts.append(Action(0.0, 0.0, 1.0))  # release handle, frame 13
    handle_open = _handle_pos(1.0)
    clear_pt = (0.38, 0.38)
    acts += _segment(clear_pt, handle_open, 4)
    cup_open = _tray_cup_pos(1.0, state0.cup[0] - DRAWER["handle_x"])
    acts += _segment(cup_open, clear_pt, 5)
    acts.append(Action(0.0, 0.0, -1.0))  # grasp cup at frame 23
    acts += _segment(g["top_point"], cup_open, 5)
    acts.append(Action(0.0, 0.0, 1.0))  # gentle release on top, frame 29
    acts.append(Action(-1.8, 0.0, 0.0))  # retreat, frame 30
    return acts


def scripted_demo(seed: int, scenario: str, domain: str, size: int = 32) -> Trajectory:
    """Waypoint policy completing all stages with fixed instruction frames."""
    spec = get_scenario(scenario)
    state = reset(seed, scenario)
    actions = _demo_actions(state)
    if len(actions) != EPISODE_STEPS:
        raise DemoScriptError(f"script for {scenario} yields {len(actions)} steps, wanted {EPISODE_STEPS}")
    observations = [render(state, domain, size)]
    states = [state]
    acts = []
    for a in actions:
        state = step(state, a)
        observations.append(render(state, domain, size))
        states.append(state)
        acts.append(a.as_array())
    for i, t_i in enumerate(spec.instruction_frames, start=1):
        if not spec.predicates[i](states[t_i]):
            raise DemoScriptError(f"demo seed {seed} ({scenario}): stage {i} predicate false at frame {t_i}")
    if not spec.predicates[0](states[0]):
        raise DemoScriptError(f"demo seed {seed} ({scenario}): stage 0 predicate false at reset")
    return Trajectory(scenario, domain, seed, observations, acts, states, source="demo")


# -- staged random rollouts -----------------------------------------------------


def _apply_setting(state: WorldState, setting: str, rng: np.random.Generator) -> WorldState:
    s = state
    if s.scenario == "coffee-analog":
        g = COFFEE
        if setting == "default":
            return s
        if setting == "cup-shifted":
            x0, x1, y0, y1 = g["cup_box"]
            return replace(s, cup=(rng.uniform(x0, x1), rng.uniform(y0, y1)))
        if setting == "cup-in-gripper":
            pos = (rng.uniform(0.2, 0.8), rng.uniform(0.25, 0.75))
            return replace(s, gripper=pos, cup=pos, held="cup", aperture=0.3)
        if setting == "cup-near-machine":
            return replace(s, cup=(g["slot"][0] + rng.uniform(-0.12, 0.02), g["slot"][1] + rng.uniform(0.05, 0.18)))
        if setting == "cup-in-machine":
            return replace(s, cup=g["slot"], gripper=(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)))
        if setting == "gripper-at-button":
            return replace(s, cup=g["slot"], gripper=g["press_point"])
    else:
        g = DRAWER
        if setting == "default":
            return s
        if setting == "near-handle":
            h = _handle_pos(0.0)
            return replace(s, gripper=(h[0] + rng.uniform(-0.1, 0.1), h[1] + rng.uniform(-0.08, 0.12)))
        if setting == "handle-grasped":
            return replace(s, gripper=_handle_pos(0.0), held="handle", aperture=0.3)
        if setting == "drawer-ajar":
            o = rng.uniform(0.2, 0.45)
            return replace(s, articulation=o, cup=_tray_cup_pos(o, s.cup[0] - g["handle_x"]))
        if setting == "drawer-half":
            o = rng.uniform(0.45, 0.7)
            return replace(s, articulation=o, cup=_tray_cup_pos(o, s.cup[0] - g["handle_x"]))
        if setting == "drawer-open":
            o = rng.uniform(0.85, 1.0)
            return replace(s, articulation=o, cup=_tray_cup_pos(o, s.cup[0] - g["handle_x"]))
        if setting == "gripper-clear-open":
            o = rng.uniform(0.85, 1.0)
            return replace(
                s,
                articulation=o,
                cup=_tray_cup_pos(o, s.cup[0] - g["handle_x"]),
                gripper=(rng.uniform(0.1, 0.42), rng.uniform(0.1, 0.42)),
            )
        if setting == "cup-in-gripper-open":
            o = rng.uniform(0.85, 1.0)
            pos = (rng.uniform(0.3, 0.85), rng.uniform(0.2, 0.7))
            return replace(s, articulation=o, gripper=pos, cup=pos, held="cup", cup_riding=False, aperture=0.3)
        if setting == "cup-out-mid":
            o = rng.uniform(0.85, 1.0)
            return replace(
                s,
                articulation=o,
                cup=(rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.6)),
                cup_riding=False,
                gripper=(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)),
            )
        if setting == "cup-on-top":
            o = rng.uniform(0.85, 1.0)
            t = g["top_point"]
            return replace(
                s,
                articulation=o,
                cup=(t[0] + rng.uniform(-0.04, 0.04), t[1] + rng.uniform(-0.03, 0.03)),
                cup_riding=False,
                gripper=(rng.uniform(0.2, 0.7), rng.uniform(0.2, 0.7)),
            )
        if setting == "drawer-open-gripper-far":
            o = rng.uniform(0.85, 1.0)
            return replace(
                s,
                articulation=o,
                cup=_tray_cup_pos(o, s.cup[0] - g["handle_x"]),
                gripper=(rng.uniform(0.05, 0.5), rng.uniform(0.5, 0.95)),
            )
    raise SimError(f"unknown setting {setting!r} for scenario {state.scenario!r}")


def random_rollout(
    seed: int, scenario: str, setting: str, domain: str = "robot", size: int = 32, steps: int = EPISODE_STEPS
) -> Trajectory:
    """Uniform random actions from a staged initialization."""
    spec = get_scenario(scenario)
    if setting not in spec.settings:
        raise SimError(f"unknown setting {setting!r} for scenario {scenario!r}; registered: {spec.settings}")
    rng = np.random.default_rng(seed)
    state = _apply_setting(reset(seed, scenario), setting, rng)
    observations = [render(state, domain, size)]
    states = [state]
    acts = []
    for _ in range(steps):
        a = rng.uniform(ACTION_LOW, ACTION_HIGH)
        state = step(state, a)
        observations.append(render(state, domain, size))
        states.append(state)
        acts.append(a)
    return Trajectory(scenario, domain, seed, observations, acts, states, source=f"random:{setting}")
