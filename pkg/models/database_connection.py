from contextlib import contextmanager
from typing import Iterator

from loguru import logger
from sqlalchemy import Engine, StaticPool
from sqlmodel import SQLModel, Session, create_engine

from config import config


def get_engine(url: str | None = None) -> Engine:
    url = url or config.database_url
    kwargs = {}
    if url.startswith("sqlite"):
        kwargs["connect_args"] = {"check_same_thread": False}
        if url in ("sqlite://", "sqlite:///:memory:"):
            # 内存数据库需要所有连接共用同一个
            kwargs["poolclass"] = StaticPool
    return create_engine(url, echo=config.debug, **kwargs)


def init_db(engine: Engine) -> None:
    """创建所有表"""
    SQLModel.metadata.create_all(engine)
    logger.debug(f"数据库表已就绪: {engine.url}")


@contextmanager
def get_session(engine: Engine) -> Iterator[Session]:
    with Session(engine) as session:
        yield session
