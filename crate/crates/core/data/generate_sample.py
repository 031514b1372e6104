#!/usr/bin/env python3
"""Regenerate us101_sample.csv.

Writes a synthetic excerpt in the 18-column layout of the public NGSIM
US-101 trajectory files (speeds in ft/s, 10 Hz frames). The speed profiles
are a seeded car-following style random process shaped like the congested
morning periods: stop-and-go waves that later open up to free flow. No
rows are copied from the real dataset.

    python3 generate_sample.py > us101_sample.csv
"""

import math
import random

HEADER = (
    "Vehicle_ID,Frame_ID,Total_Frames,Global_Time,Local_X,Local_Y,Global_X,Global_Y,"
    "v_Length,v_Width,v_Class,v_Vel,v_Acc,Lane_ID,Preceding,Following,Space_Headway,Time_Headway"
)
BASE_TIME_MS = 1118846980200


def speed_profile(rng, n, waves, free_flow):
    """Speed in ft/s: stop-and-go waves relaxing toward free flow."""
    v = rng.uniform(15.0, 25.0)
    a = 0.0
    out = []
    for k in range(n):
        phase = k / n
        # Congested target oscillates; the last third drifts to free flow.
        wave = 0.5 * (1.0 + math.sin(2.0 * math.pi * waves * phase + rng.uniform(-0.05, 0.05)))
        congested = 8.0 + 30.0 * wave
        blend = min(1.0, max(0.0, (phase - 0.6) / 0.3))
        target = (1.0 - blend) * congested + blend * free_flow
        a = 0.9 * a + 0.1 * (0.8 * (target - v)) + rng.gauss(0.0, 0.6)
        a = max(-11.0, min(8.0, a))
        v = max(0.0, v + 0.1 * a)
        out.append((v, a))
    return out


def main():
    rng = random.Random(20050615)
    vehicles = [
        # id, first frame, frames, waves, free-flow ft/s, gap (frame, length)
        (1, 1200, 900, 3.0, 58.0, None),
        (2, 1215, 900, 3.0, 55.0, None),
        (3, 1500, 420, 1.5, 50.0, (200, 6)),
        (4, 1700, 150, 0.5, 40.0, None),
    ]
    print(HEADER)
    for vid, start, n, waves, free, gap in vehicles:
        profile = speed_profile(rng, n, waves, free)
        lane = 1 + vid % 5
        y = rng.uniform(20.0, 60.0)
        frames = list(range(start, start + n))
        if gap is not None:
            at, length = gap
            frames = frames[:at] + [f + length for f in frames[at:]]
        for k, (frame, (v, acc)) in enumerate(zip(frames, profile)):
            y += 0.1 * v
            x = 6.0 + 12.0 * (lane - 1) + rng.uniform(-0.3, 0.3)
            gx = 6451000.0 + 0.6 * y + x
            gy = 1873000.0 - 0.8 * y
            headway = max(10.0, 25.0 + 1.2 * v + rng.uniform(-5, 5))
            time_headway = headway / v if v > 0.1 else 9999.99
            print(
                f"{vid},{frame},{n},{BASE_TIME_MS + 100 * frame},{x:.3f},{y:.3f},{gx:.3f},{gy:.3f},"
                f"14.5,6.9,2,{v:.2f},{acc:.2f},{lane},{vid + 100},{vid + 200},{headway:.2f},{time_headway:.2f}"
            )


if __name__ == "__main__":
    main()
