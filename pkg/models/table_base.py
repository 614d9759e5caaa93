from datetime import datetime, timezone
from typing import Literal, Sequence, TypeVar, Type

from sqlalchemy import DateTime, ClauseElement
from sqlalchemy.orm import selectinload
from sqlmodel import Field, Session, select

T = TypeVar("T", bound="TableBase")

FetchMode = Literal["one", "first", "all"]


def utcnow() -> datetime:
    return datetime.now(tz=timezone.utc)


class TableBase:
    """验证记录表的公共字段与同步 CRUD 辅助方法"""

    created_at: datetime = Field(default_factory=utcnow)
    updated_at: datetime = Field(
        sa_type=DateTime,
        sa_column_kwargs={"default": utcnow, "onupdate": utcnow},
        default_factory=utcnow,
    )

    def save(self: T, session: Session, load=None) -> T:
        """提交当前记录；给出 load 时重新查询并预加载该关系"""
        session.add(self)
        session.commit()
        if load is None:
            session.refresh(self)
            return self
        cls = type(self)
        return cls.get(session, cls.id == self.id, load=load)

    @classmethod
    def delete(cls: Type[T], session: Session, records: T | list[T]) -> None:
        for record in records if isinstance(records, list) else [records]:
            session.delete(record)
        session.commit()

    @classmethod
    def get(
            cls: Type[T],
            session: Session,
            condition: ClauseElement | None,
            *,
            fetch_mode: FetchMode = "first",
            load=None,
            order_by: Sequence[ClauseElement] = (),
            offset: int | None = None,
            limit: int | None = None,
    ) -> T | list[T] | None:
        """
        按条件查询

        参数:
            condition: 过滤条件，None 表示不过滤
            fetch_mode: "first" 返回第一条或 None，"one" 要求恰好一条，"all" 返回列表
            load: 用 selectinload 预加载的关系属性
            order_by / offset / limit: 排序与分页
        """
        statement = select(cls)
        if condition is not None:
            statement = statement.where(condition)
        if load is not None:
            statement = statement.options(selectinload(load))
        if order_by:
            statement = statement.order_by(*order_by)
        statement = statement.offset(offset).limit(limit)

        rows = session.exec(statement)
        match fetch_mode:
            case "all":
                return list(rows.all())
            case "one":
                return rows.one()
            case "first":
                return rows.first()
        raise ValueError(f"无效的 fetch_mode: {fetch_mode}")
