from .instance import Instance, NodeSpec, Coflow, Flow, EdgeCapInstance, UNBOUNDED
from .schedule import Schedule, UnitRef
from .certify_record import CertifyRun, SeedRecord

from models.database_connection import get_engine, get_session, init_db
