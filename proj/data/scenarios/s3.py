# Pedestrian response, variant 3: braking issued before the camera detection.
import can
from kuksa_client.grpc import VSSClient, Datapoint

BRAKE_CMD = 0x101


def step(bus, vss, camera, detector):
    frame = camera.read()
    bus.send(can.Message(arbitration_id=BRAKE_CMD, data=[100]))
    vss.set_target_values({"Vehicle.ADAS.Brake.IsEngaged": Datapoint(True)})
    pedestrian = detector.find_pedestrian(frame)
    vss.set_current_values({
        "Vehicle.ADAS.PedestrianDetection.Camera.IsDetected": Datapoint(pedestrian is not None),
    })
