# Pedestrian response, variant 2: camera sensing, braking on a LiDAR detection.
import can
from kuksa_client.grpc import VSSClient, Datapoint

BRAKE_CMD = 0x101


def step(bus, vss, camera, detector):
    frame = camera.read()
    detector.update(frame)
    lidar_hit = vss.get_current_values(
        ["Vehicle.ADAS.PedestrianDetection.Lidar.IsDetected"])
    if lidar_hit["Vehicle.ADAS.PedestrianDetection.Lidar.IsDetected"].value:
        bus.send(can.Message(arbitration_id=BRAKE_CMD, data=[100]))
        vss.set_target_values({"Vehicle.ADAS.Brake.IsEngaged": Datapoint(True)})
