"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class PolyrouteError(Exception):
    """Base class for all engine errors."""


# registry
class CatalogError(PolyrouteError):
    pass


class ConfigParse(CatalogError):
    pass


class DuplicateKbId(CatalogError):
    pass


class MissingContextFile(CatalogError):
    pass


class BadConnection(CatalogError):
    pass


class EmptyCatalog(CatalogError):
    pass


# llm gateway
class GatewayError(PolyrouteError):
    pass


class Transport(GatewayError):
    pass


class Auth(GatewayError):
    pass


class RateLimited(GatewayError):
    pass


class ScriptMiss(GatewayError):
    pass


class JsonExtractError(PolyrouteError):
    pass


class NoJsonFound(JsonExtractError):
    pass


class MalformedJson(JsonExtractError):
    pass


# pipeline stages
class EmptySelection(PolyrouteError):
    pass


class SelectionFailed(PolyrouteError):
    def __init__(self, message: str, cause: BaseException | None = None):
        super().__init__(message)
        self.cause = cause


class FormulationFailed(PolyrouteError):
    pass


class NoCandidates(PolyrouteError):
    pass


class ContextParse(PolyrouteError):
    def __init__(self, message: str, line: str = ""):
        super().__init__(f"{message}: {line!r}" if line else message)
        self.line = line


# execution
class ExecError(PolyrouteError):
    pass


class ExecTimeout(ExecError):
    pass


class BackendError(ExecError):
    pass


class QuerySyntax(ExecError):
    pass


class CorpusParse(ExecError):
    pass


# evaluation
class MissingParadigm(PolyrouteError):
    pass


class GoldExecutionFailed(PolyrouteError):
    pass


class DatasetError(PolyrouteError):
    pass
