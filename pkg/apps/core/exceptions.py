"""
Exploration Exceptions and API Exception Handler
"""

from rest_framework.views import exception_handler
from rest_framework.response import Response
from rest_framework import status


class ExplorationError(Exception):
    """Base class for every error raised by the exploration apps."""

    default_message = 'Exploration error.'

    def __init__(self, message=None, **context):
        self.context = context
        super().__init__(message or self.default_message)


class SimulationFault(ExplorationError):
    """A robot was driven into an occupied cell."""

    default_message = 'Robot path enters an occupied cell.'

    def __init__(self, robot_id, cell, message=None):
        self.robot_id = robot_id
        self.cell = tuple(int(c) for c in cell)
        super().__init__(
            message or f'Robot {robot_id} path enters occupied cell {self.cell}.',
            robot_id=robot_id, cell=self.cell,
        )


class RayOriginError(ExplorationError):
    default_message = 'Ray origin lies in an occupied cell.'


class EmptyFrameError(ExplorationError):
    """No unobstructed sample in a sensor frame, no polytope can be built."""

    default_message = 'Sensor frame has no free samples.'


class FlipDomainError(ExplorationError):
    default_message = 'Point lies outside the sphere flip domain.'


class DegenerateHullError(ExplorationError):
    """Flipped sample set has no 3D convex hull."""

    def __init__(self, frame_id, message=None):
        self.frame_id = frame_id
        super().__init__(message or f'Degenerate hull for frame {frame_id}.', frame_id=frame_id)


class ProtocolFault(ExplorationError):
    default_message = 'Mission protocol invariant violated.'


class DeadlineFault(ProtocolFault):
    """A robot did not reach its rendezvous by T_c + dt."""

    def __init__(self, robot_id, mission_id, t, message=None):
        self.robot_id = robot_id
        self.mission_id = mission_id
        self.t = t
        super().__init__(
            message or f'Robot {robot_id} missed rendezvous of mission {mission_id} at t={t:.2f}.',
            robot_id=robot_id, mission_id=mission_id, t=t,
        )


class InfeasiblePlanError(ExplorationError):
    default_message = 'Direct route to the rendezvous exceeds the remaining budget.'


class SolverLimitExceeded(ExplorationError):
    default_message = 'Instance exceeds the exact solver cap.'


class NoRendezvousError(ExplorationError):
    default_message = 'No reachable super viewpoint to meet at.'


class ScenarioError(ExplorationError):
    default_message = 'Invalid scenario.'

    def __init__(self, message=None, errors=None):
        self.errors = errors
        super().__init__(message, errors=errors)


class CodecError(ExplorationError):
    default_message = 'Malformed wire stream.'


def custom_exception_handler(exc, context):
    """
    Custom exception handler that formats error responses consistently.
    Exploration errors surface as 400 with their context attached.
    """
    response = exception_handler(exc, context)

    if response is None and isinstance(exc, ExplorationError):
        return Response({
            'success': False,
            'message': str(exc),
            'errors': {key: str(value) for key, value in exc.context.items()} or None,
        }, status=status.HTTP_400_BAD_REQUEST)

    if response is not None:
        custom_response = {
            'success': False,
            'message': 'An error occurred.',
            'errors': None
        }

        if isinstance(response.data, dict):
            if 'detail' in response.data:
                custom_response['message'] = str(response.data['detail'])
            else:
                custom_response['message'] = 'Validation error.'
                custom_response['errors'] = response.data
        elif isinstance(response.data, list):
            custom_response['message'] = response.data[0] if response.data else 'An error occurred.'
        else:
            custom_response['message'] = str(response.data)

        response.data = custom_response

    return response
