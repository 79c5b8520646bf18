# Hazard lights on stop.
from kuksa_client.grpc import VSSClient, Datapoint


def on_stop(vss):
    vss.set_target_values({"Vehicle.Body.Lights.Hazard.IsSignaling": Datapoint(True)})
