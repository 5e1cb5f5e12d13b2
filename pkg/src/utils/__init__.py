from .projections import BallDomain, BoxDomain, project_ball, project_box, project_nonneg
from .random_streams import SampleStream
from .trace_io import TraceIO
