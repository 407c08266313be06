#!/usr/bin/env python3
"""Generates the bundled synthetic camp fixtures under data/.

Three camps mirroring common summer-camp shapes:
  camp-a  morning camp, 21 children + 5 educators in 3 groups
  camp-b  all-day camp, 13 children + 5 educators in 2 groups
  camp-c  all-day camp,  9 children + 2 educators in 1 group

Each camp directory gets: roster.csv, schedule.csv, exemptions.csv,
absences.csv, active_windows.csv, mobility.toml and config.toml. The mobility
script parks all devices on a storage bench overnight (with the inhibitor
beacon powered), releases the inhibitor shortly before the camp day starts so
the bench produces the characteristic constant-distance runs, and then drives
each group through its scheduled activities.

Deterministic: no randomness here; all randomness lives in the simulator seed.
"""

import os
from dataclasses import dataclass, field

BASE_A = 1597622400  # 2020-08-17 00:00:00 UTC, a Monday
BASE_BC = BASE_A + 7 * 86400  # the following Monday
DAYS = 5

OUT_ROOT = os.path.join(os.path.dirname(__file__), "..", "data")


def hm(h, m=0):
    return h * 3600 + m * 60


@dataclass
class Block:
    group: str
    activity: str
    location: str
    start: int  # offset within day
    end: int
    excluded: bool = False


@dataclass
class Camp:
    camp_id: str
    base: int
    children: int
    educators: int
    groups: list
    day_start: int  # camp opening (active window start)
    day_end: int
    pickup: int  # devices leave the bench
    bench_return: int  # devices go back to the bench
    zones: dict = field(default_factory=dict)
    seed: int = 0


# Activity -> (pause_lo, pause_hi) dwell seconds; seated activities pin kids
# down for long stretches, free running barely at all.
PAUSES = {
    "woods": (3, 25),
    "soccer": (3, 20),
    "board games": (300, 1500),
    "newspaper": (600, 2400),
    "theater": (60, 420),
    "team games": (10, 90),
    "crafts": (240, 1200),
    "snack": (120, 600),
    "hiking": (2, 15),
    "round table": (300, 1500),
    "day closing": (5, 40),
    "outdoor lunch": (300, 1200),
    "indoor lunch": (300, 1200),
    "free play": (20, 200),
    "welcoming": (30, 120),
    "swimming pool": (30, 120),
}

INDOOR = {
    "board games", "newspaper", "theater", "snack", "team games", "crafts",
    "round table", "indoor lunch", "welcoming",
}


def device_ids(camp):
    kids = [f"{camp.camp_id[-1]}c{i+1:02d}" for i in range(camp.children)]
    eds = [f"{camp.camp_id[-1]}e{i+1:02d}" for i in range(camp.educators)]
    return kids, eds


def assign_groups(camp):
    kids, eds = device_ids(camp)
    roster = []
    for i, d in enumerate(kids):
        roster.append((d, "child", camp.groups[i % len(camp.groups)]))
    for i, d in enumerate(eds):
        roster.append((d, "educator", camp.groups[i % len(camp.groups)]))
    return roster


def members(roster, group):
    return [d for d, _, g in roster if g == group]


def leaders(roster, group):
    """One popular child and one educator per group, used as affinity hubs."""
    kids = [d for d, r, g in roster if g == group and r == "child"]
    eds = [d for d, r, g in roster if g == group and r == "educator"]
    hub_child = kids[0] if kids else None
    hub_ed = eds[0] if eds else None
    return hub_child, hub_ed


def toml_entry(lines, *, target_kind, target, start, end, zone, movement,
               pause=None, position=None, affinity=None, speed=None):
    lines.append("[[entry]]")
    if target_kind == "all":
        lines.append("all = true")
    else:
        lines.append(f'{target_kind} = "{target}"')
    lines.append(f"start = {start}")
    lines.append(f"end = {end}")
    lines.append(f"zone = [{zone[0]}, {zone[1]}, {zone[2]}, {zone[3]}]")
    lines.append(f'movement = "{movement}"')
    if speed is not None:
        lines.append(f"speed = {speed}")
    if pause is not None:
        lines.append(f"pause = [{pause[0]}, {pause[1]}]")
    if position is not None:
        lines.append(f"position = [{position[0]}, {position[1]}]")
    if affinity:
        pairs = ", ".join(f'["{d}", {w}]' for d, w in affinity)
        lines.append(f"affinity = [{pairs}]")
    lines.append("")


BENCH_ZONE = (0.5, 0.5, 1.5, 1.5)


def write_camp(camp, schedule_for_day, sibling_pairs, cross_pairs, absences):
    out_dir = os.path.join(OUT_ROOT, camp.camp_id)
    os.makedirs(out_dir, exist_ok=True)
    roster = assign_groups(camp)

    with open(os.path.join(out_dir, "roster.csv"), "w") as f:
        f.write("device_id,role,group_id,camp_id\n")
        for d, role, g in roster:
            f.write(f"{d},{role},{g},{camp.camp_id}\n")

    blocks = []  # (day, Block)
    for day in range(DAYS):
        for b in schedule_for_day(day):
            blocks.append((day, b))
    with open(os.path.join(out_dir, "schedule.csv"), "w") as f:
        f.write("camp_id,group_id,activity,location,start,end,excluded\n")
        for day, b in blocks:
            s = camp.base + day * 86400 + b.start
            e = camp.base + day * 86400 + b.end
            f.write(
                f"{camp.camp_id},{b.group},{b.activity},{b.location},"
                f"{s},{e},{'true' if b.excluded else 'false'}\n"
            )

    with open(os.path.join(out_dir, "exemptions.csv"), "w") as f:
        f.write("device_a,device_b\n")
        for a, b in sibling_pairs + cross_pairs:
            f.write(f"{a},{b}\n")

    with open(os.path.join(out_dir, "active_windows.csv"), "w") as f:
        f.write("camp_id,start,end\n")
        for day in range(DAYS):
            s = camp.base + day * 86400 + camp.day_start
            e = camp.base + day * 86400 + camp.day_end
            f.write(f"{camp.camp_id},{s},{e}\n")

    with open(os.path.join(out_dir, "absences.csv"), "w") as f:
        f.write("device_id,start,end\n")
        for device, day, lo, hi in absences:
            s = camp.base + day * 86400 + lo
            e = camp.base + day * 86400 + hi
            f.write(f"{device},{s},{e}\n")

    # Simulation horizon: 30 min before the first camp day opens until 15 min
    # after the last day's bench return.
    sim_start = camp.base + camp.day_start - hm(0, 30)
    sim_end = camp.base + (DAYS - 1) * 86400 + camp.bench_return + hm(0, 5)
    inhibitor_off = camp.day_start - hm(0, 6)  # powered off a few minutes early

    lines = ["# Mobility script for the bundled synthetic camp.", ""]

    # Bench coverage: from the sim start / previous bench return until the
    # morning pickup, everyone sits on the storage bench.
    for day in range(DAYS):
        bench_from = sim_start if day == 0 else camp.base + (day - 1) * 86400 + camp.bench_return
        bench_to = camp.base + day * 86400 + camp.pickup
        toml_entry(lines, target_kind="all", target=None, start=bench_from,
                   end=bench_to, zone=BENCH_ZONE, movement="static")
    # Final bench stretch after the last pickup day.
    toml_entry(lines, target_kind="all", target=None,
               start=camp.base + (DAYS - 1) * 86400 + camp.bench_return,
               end=sim_end, zone=BENCH_ZONE, movement="static")

    def emit_day_for(target_kind, target, day, day_blocks, affinity):
        """Walk + blocks + transitions + return-to-bench for one target."""
        day_base = camp.base + day * 86400
        first_zone = camp.zones[day_blocks[0].activity_zone]
        pickup = day_base + camp.pickup
        toml_entry(lines, target_kind=target_kind, target=target,
                   start=pickup, end=day_base + day_blocks[0].start,
                   zone=first_zone, movement="waypoint", pause=(5, 30),
                   affinity=affinity)
        for i, b in enumerate(day_blocks):
            zone = camp.zones[b.activity_zone]
            toml_entry(lines, target_kind=target_kind, target=target,
                       start=day_base + b.start, end=day_base + b.end,
                       zone=zone, movement="waypoint",
                       pause=PAUSES[b.activity], affinity=affinity)
            nxt = day_blocks[i + 1] if i + 1 < len(day_blocks) else None
            if nxt is not None and nxt.start > b.end:
                toml_entry(lines, target_kind=target_kind, target=target,
                           start=day_base + b.end, end=day_base + nxt.start,
                           zone=camp.zones[nxt.activity_zone],
                           movement="waypoint", pause=(3, 15),
                           affinity=affinity)
        last = day_blocks[-1]
        if camp.bench_return > last.end:
            toml_entry(lines, target_kind=target_kind, target=target,
                       start=day_base + last.end,
                       end=day_base + camp.bench_return,
                       zone=first_zone, movement="waypoint", pause=(3, 15),
                       affinity=affinity)

    # Group entries per day.
    per_group_day = {}
    for day in range(DAYS):
        for g in camp.groups:
            gb = [b for d, b in blocks if d == day and b.group == g]
            gb.sort(key=lambda b: b.start)
            per_group_day[(g, day)] = gb
    for day in range(DAYS):
        for g in camp.groups:
            hub_child, hub_ed = leaders(roster, g)
            affinity = []
            if hub_child:
                affinity.append((hub_child, 0.35))
            if hub_ed:
                affinity.append((hub_ed, 0.25))
            emit_day_for("group", g, day, per_group_day[(g, day)], affinity)

    # Sibling shadows: the younger sibling mirrors the group's day but with a
    # strong pull toward the older one.
    for younger, older in sibling_pairs:
        g = next(gr for d, _, gr in roster if d == younger)
        for day in range(DAYS):
            if any(dev == younger and dy == day for dev, dy, _, _ in absences):
                continue
            emit_day_for("device", younger, day, per_group_day[(g, day)],
                         [(older, 4.0)])

    # Absences: the device stays on the bench while its carrier is away.
    for device, day, lo, hi in absences:
        day_base = camp.base + day * 86400
        start = max(day_base + camp.pickup, day_base + lo)
        end = day_base + hi
        if start < end:
            toml_entry(lines, target_kind="device", target=device,
                       start=start, end=end, zone=BENCH_ZONE,
                       movement="static")

    with open(os.path.join(out_dir, "mobility.toml"), "w") as f:
        f.write("\n".join(lines))

    inhibitor = []
    first_off = camp.base + inhibitor_off
    inhibitor.append((sim_start, first_off))
    for day in range(1, DAYS):
        on = camp.base + (day - 1) * 86400 + camp.bench_return + hm(0, 3)
        off = camp.base + day * 86400 + inhibitor_off
        inhibitor.append((on, off))

    with open(os.path.join(out_dir, "config.toml"), "w") as f:
        f.write("# Simulation and pipeline settings for the bundled camp.\n\n")
        f.write("[sim]\n")
        f.write(f"seed = {camp.seed}\n")
        f.write(f"start = {sim_start}\n")
        f.write(f"end = {sim_end}\n")
        f.write("range_noise_sigma_m = 0.03\n")
        pairs = ", ".join(f"[{a}, {b}]" for a, b in inhibitor)
        f.write(f"inhibitor = [{pairs}]\n\n")
        f.write("[preprocess]\n")
        f.write("min_run = 5\n")
        # The simulated ranging noise is 3 cm; a 25 cm band cleanly captures
        # bench runs without eating real interactions.
        f.write("epsilon_m = 0.25\n")
        f.write("margin_s = 900\n")


# ── camp-a ──────────────────────────────────────────────────────────────────

def make_camp_a():
    camp = Camp(
        camp_id="camp-a", base=BASE_A, children=21, educators=5,
        groups=["A1", "A2", "A3"],
        day_start=hm(8), day_end=hm(12, 30),
        pickup=hm(8, 5), bench_return=hm(12, 30),
        seed=20200817,
    )
    camp.zones = {
        "hall": (0.0, 0.0, 36.0, 20.0),
        "room2": (42.0, 0.0, 78.0, 20.0),
        "room3": (84.0, 0.0, 120.0, 20.0),
        "field": (0.0, 18.0, 52.0, 52.0),
        "woods": (80.0, 0.0, 140.0, 40.0),
    }
    group_room = {"A1": "hall", "A2": "room2", "A3": "room3"}

    # Rotation of the two morning slots plus a short third slot; every day
    # ends with a camp-wide 15-minute snack right before pickup.
    rotations = {
        "A1": [("woods", "soccer"), ("board games", "woods"),
               ("soccer", "newspaper"), ("theater", "team games"),
               ("newspaper", "soccer")],
        "A2": [("soccer", "board games"), ("woods", "theater"),
               ("team games", "woods"), ("newspaper", "soccer"),
               ("crafts", "team games")],
        "A3": [("board games", "woods"), ("soccer", "crafts"),
               ("woods", "team games"), ("crafts", "soccer"),
               ("team games", "theater")],
    }
    third = {
        "A1": ["crafts", "team games", "theater", "board games", "crafts"],
        "A2": ["theater", "newspaper", "crafts", "board games", "theater"],
        "A3": ["newspaper", "theater", "board games", "newspaper", "crafts"],
    }

    def schedule_for_day(day):
        out = []
        for g in camp.groups:
            a1, a2 = rotations[g][day]
            a3 = third[g][day]
            for activity, (s, e) in [
                (a1, (hm(8, 10), hm(9, 40))),
                (a2, (hm(9, 50), hm(11, 20))),
                (a3, (hm(11, 30), hm(12, 15))),
                ("snack", (hm(12, 15), hm(12, 30))),
            ]:
                loc = "indoor" if activity in INDOOR else "outdoor"
                zone = group_room[g] if loc == "indoor" else (
                    "field" if activity in ("soccer", "team games", "free play") else "woods")
                b = Block(g, activity, loc, s, e)
                b.activity_zone = zone
                out.append(b)
        return out

    siblings = [("ac07", "ac04")]  # both in A1
    cross = [("ac08", "ac15")]
    absences = [
        ("ac05", 1, hm(8), hm(12, 30)),   # absent all Tuesday
        ("ac17", 4, hm(8), hm(10)),       # late arrival Friday
    ]
    write_camp(camp, schedule_for_day, siblings, cross, absences)


# ── camp-b ──────────────────────────────────────────────────────────────────

def make_camp_b():
    camp = Camp(
        camp_id="camp-b", base=BASE_BC, children=13, educators=5,
        groups=["B1", "B2"],
        day_start=hm(8), day_end=hm(16, 30),
        pickup=hm(8, 5), bench_return=hm(16, 30),
        seed=20200824,
    )
    camp.zones = {
        "hall": (0.0, 0.0, 18.0, 12.0),
        "lunchroom": (24.0, 0.0, 40.0, 11.0),
        "field": (0.0, 16.0, 44.0, 52.0),
        "yard": (48.0, 0.0, 76.0, 24.0),
    }

    def schedule_for_day(day):
        out = []
        for gi, g in enumerate(camp.groups):
            plan = [
                ("welcoming", (hm(8, 10), hm(8, 40)), True),
                ("team games", (hm(8, 50), hm(10, 50)), False),
                ("free play", (hm(11, 0), hm(12, 0)), False),
                ("indoor lunch", (hm(12, 10), hm(13, 10)), False),
                ("team games", (hm(13, 20), hm(15, 20)), False),
                ("day closing", (hm(16, 0), hm(16, 30)), False),
            ]
            for activity, (s, e), excluded in plan:
                loc = "indoor" if activity in INDOOR else "outdoor"
                if activity == "welcoming":
                    zone = "hall"
                elif activity == "indoor lunch":
                    zone = "lunchroom"
                elif activity == "team games":
                    zone = "hall" if gi == 0 else "lunchroom"
                elif activity == "day closing":
                    zone = "yard"
                else:
                    zone = "field" if gi == 0 else "yard"
                b = Block(g, activity, loc, s, e, excluded)
                b.activity_zone = zone
                out.append(b)
        return out

    siblings = [("bc07", "bc05")]  # both in B1
    absences = [("bc11", 2, hm(8), hm(16, 30))]
    write_camp(camp, schedule_for_day, siblings, [], absences)


# ── camp-c ──────────────────────────────────────────────────────────────────

def make_camp_c():
    camp = Camp(
        camp_id="camp-c", base=BASE_BC, children=9, educators=2,
        groups=["C1"],
        day_start=hm(8), day_end=hm(16, 30),
        pickup=hm(8, 5), bench_return=hm(16, 30),
        seed=20200825,
    )
    camp.zones = {
        "hall": (0.0, 0.0, 14.0, 10.0),
        "meadow": (0.0, 14.0, 34.0, 38.0),
        "trail": (40.0, 0.0, 130.0, 28.0),
        "pool": (0.0, 42.0, 18.0, 54.0),
    }

    plans = [
        [("welcoming", (hm(8, 10), hm(8, 40)), True, "hall"),
         ("crafts", (hm(8, 50), hm(11, 50)), False, "hall"),
         ("outdoor lunch", (hm(12, 0), hm(13, 0)), False, "meadow"),
         ("round table", (hm(13, 10), hm(16, 10)), False, "hall"),
         ("day closing", (hm(16, 10), hm(16, 30)), False, "meadow")],
        [("hiking", (hm(8, 40), hm(12, 40)), False, "trail"),
         ("outdoor lunch", (hm(12, 50), hm(13, 50)), False, "meadow"),
         ("free play", (hm(14, 0), hm(15, 0)), False, "meadow"),
         ("team games", (hm(15, 10), hm(16, 30)), False, "hall")],
        [("swimming pool", (hm(8, 40), hm(10, 40)), True, "pool"),
         ("team games", (hm(10, 50), hm(12, 50)), False, "hall"),
         ("outdoor lunch", (hm(13, 0), hm(14, 0)), False, "meadow"),
         ("round table", (hm(14, 10), hm(16, 30)), False, "hall")],
        [("crafts", (hm(8, 40), hm(11, 40)), False, "hall"),
         ("outdoor lunch", (hm(11, 50), hm(12, 50)), False, "meadow"),
         ("free play", (hm(13, 0), hm(14, 0)), False, "hall"),
         ("day closing", (hm(15, 30), hm(16, 30)), False, "meadow")],
        [("round table", (hm(8, 40), hm(11, 40)), False, "hall"),
         ("team games", (hm(11, 50), hm(13, 50)), False, "hall"),
         ("outdoor lunch", (hm(14, 0), hm(15, 0)), False, "meadow"),
         ("day closing", (hm(15, 30), hm(16, 30)), False, "meadow")],
    ]

    def schedule_for_day(day):
        out = []
        for activity, (s, e), excluded, zone in plans[day]:
            loc = "indoor" if activity in INDOOR else "outdoor"
            b = Block("C1", activity, loc, s, e, excluded)
            b.activity_zone = zone
            out.append(b)
        return out

    siblings = [("cc02", "cc01")]
    absences = []
    write_camp(camp, schedule_for_day, siblings, [], absences)


if __name__ == "__main__":
    make_camp_a()
    make_camp_b()
    make_camp_c()
    print(f"fixtures written under {os.path.abspath(OUT_ROOT)}")
