#!/usr/bin/env python3
"""Replay a .rec file against a running feedback service and print the
per-frame overall dissimilarity plus the end-of-session summary.

    python3 scripts/replay_client.py --service ws://127.0.0.1:8777/session \
        --exercise E1 --rec service_state/replay_E1.rec
"""

import argparse
import asyncio
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import websockets

from rehabkit.skeleton_io import load_recording


async def replay(service: str, exercise: str, rec_path: str, fps: float) -> None:
    recording = load_recording(rec_path)
    async with websockets.connect(service) as ws:
        await ws.send(json.dumps({"v": 1, "kind": "start_session", "seq": 0,
                                  "exercise_id": exercise}))
        started = json.loads(await ws.recv())
        if started.get("kind") == "error":
            print("error:", started)
            return
        print(f"session {started['session_id']} started "
              f"({started['template_frames']}-frame template)")
        for i, frame in enumerate(recording.frames):
            await ws.send(json.dumps({
                "v": 1, "kind": "live_frame", "seq": i + 1,
                "frame": {"positions": frame.positions.tolist(),
                          "orientations": frame.orientations.tolist()}}))
            feedback = json.loads(await ws.recv())
            worst = max(feedback["t_values"]) if feedback.get("t_values") else 0
            print(f"frame {i:3d}  overall {feedback.get('overall', 0):.4f}  "
                  f"worst joint {worst:.4f}")
            await asyncio.sleep(1.0 / fps)
        await ws.send(json.dumps({"v": 1, "kind": "end_session",
                                  "seq": len(recording.frames) + 1}))
        summary = json.loads(await ws.recv())
        score = summary.get("predicted_score")
        print(f"summary: partial={summary['partial']} frames={summary['frames']} "
              f"predicted score={'n/a' if score is None else f'{score:.1f}/50'}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--service", default="ws://127.0.0.1:8777/session")
    parser.add_argument("--exercise", default="E1")
    parser.add_argument("--rec", required=True)
    parser.add_argument("--fps", type=float, default=30.0)
    args = parser.parse_args()
    asyncio.run(replay(args.service, args.exercise, args.rec, args.fps))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
