# Pedestrian response, variant 1: camera detection followed by acceleration.
import can
from kuksa_client.grpc import VSSClient, Datapoint

THROTTLE_CMD = 0x102


def step(bus, vss, camera, detector):
    frame = camera.read()
    pedestrian = detector.find_pedestrian(frame)
    if pedestrian is not None:
        vss.set_current_values({
            "Vehicle.ADAS.PedestrianDetection.Camera.IsDetected": Datapoint(True),
        })
        bus.send(can.Message(arbitration_id=THROTTLE_CMD, data=[40]))
        vss.set_target_values({"Vehicle.Speed.Target": Datapoint(25.0)})
