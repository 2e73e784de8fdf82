"""Drive the websocket session protocol with a scripted human.

Starts a server on an ephemeral port, connects as a client in lockstep mode
(one tick per input, fully reproducible), walks the human along its committed
left-pass direction for a few seconds, and prints the frames as they arrive.
This is the same wire format the browser playground speaks; see
docs/protocol.md for the full schema.
"""

import asyncio
import json
import math

from websockets.asyncio.client import connect

from cotransport.session import PROTOCOL_VERSION, serve
from cotransport.scenario import study_scenario


async def main():
    server = await serve(0, study_scenario("committed"))
    port = server.sockets[0].getsockname()[1]
    print(f"server up on ws://127.0.0.1:{port}")

    async with connect(f"ws://127.0.0.1:{port}") as ws:
        await ws.send(json.dumps({
            "type": "hello",
            "protocol_version": PROTOCOL_VERSION,
            "lockstep": True,
            "start": "side-by-side",
            "seed": 7,
        }))
        frame = json.loads(await ws.recv())
        print(f"tick {frame['tick']:3d}: posterior={frame['posterior']} "
              f"entropy={frame['entropy']:.4f}")

        # Walk 60 degrees left of straight-ahead at 0.5 m/s for 60 ticks (4 s).
        vx, vy = 0.5 * math.cos(math.radians(150)), 0.5 * math.sin(math.radians(150))
        for _ in range(60):
            await ws.send(json.dumps({"type": "human_input", "vx": vx, "vy": vy}))
            while True:
                frame = json.loads(await ws.recv())
                if frame["type"] == "state":
                    break
                if frame["type"] == "plan":
                    continue  # forecast frames arrive every fifth tick
                print(f"  ({frame['type']}: {frame}")
            if frame["tick"] % 15 == 0:
                p_left = frame["posterior"][0]
                print(f"tick {frame['tick']:3d}: P(left)={p_left:.3f} "
                      f"entropy={frame['entropy']:.4f} "
                      f"object=({frame['object'][0]:+.2f},{frame['object'][1]:+.2f})")

        # Start a fresh, bit-identical trial without reconnecting.
        await ws.send(json.dumps({"type": "reset"}))
        frame = json.loads(await ws.recv())
        print(f"after reset: tick {frame['tick']} entropy={frame['entropy']:.4f}")

    server.close()
    await server.wait_closed()


asyncio.run(main())
