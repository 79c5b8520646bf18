# Cruise setup: speed target, cruise mode and a cabin light level.
import can
from kuksa_client.grpc import VSSClient, Datapoint

CABIN_LIGHT_CMD = 0x18FF0010


def engage(bus, vss):
    vss.set_target_values({
        "Vehicle.Speed.Target": Datapoint(20.0),
        "Vehicle.ADAS.CruiseControl.Mode": Datapoint("ACTIVE"),
    })
    bus.send(can.Message(arbitration_id=CABIN_LIGHT_CMD, is_extended_id=True, data=[30]))
