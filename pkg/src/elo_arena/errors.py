"""Exception hierarchy shared by every module."""


class EloArenaError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(EloArenaError, ValueError):
    pass


class MissingAgentError(EloArenaError, KeyError):
    def __init__(self, agent_id):
        super().__init__(agent_id)
        self.agent_id = agent_id

    def __str__(self):
        return f"unknown agent id: {self.agent_id!r}"


class InvalidJudgeError(EloArenaError, ValueError):
    pass


class ProtocolError(EloArenaError):
    """The remote judge replied with something outside the wire contract."""


class JudgeUnavailableError(EloArenaError):
    def __init__(self, message, prompt_id=None):
        super().__init__(message)
        self.prompt_id = prompt_id


class DegenerateDesignError(EloArenaError, ValueError):
    pass


class InsufficientReplicationError(EloArenaError, ValueError):
    pass


class InfiniteNoiseError(EloArenaError, ArithmeticError):
    """Slope of zero: absolute scores carry no ranking signal at all."""


class NonIdentifiableError(EloArenaError, ValueError):
    pass


class CacheError(EloArenaError):
    pass


class CacheMissError(CacheError, KeyError):
    def __init__(self, prompt_id, opponent_id):
        super().__init__((prompt_id, opponent_id))
        self.prompt_id = prompt_id
        self.opponent_id = opponent_id

    def __str__(self):
        return f"no cached response for prompt={self.prompt_id!r} opponent={self.opponent_id!r}"


class DuplicateEntryError(CacheError, ValueError):
    pass


class IncompatibleFormatError(CacheError):
    pass


class CorruptCacheError(CacheError):
    pass


class ConfigError(EloArenaError, ValueError):
    pass
