"""Exception hierarchy shared by every layer.

Each error carries a stable snake_case ``code`` so the HTTP layer can emit
machine-checkable error envelopes without string matching.
"""
from __future__ import annotations


class ContextVisError(Exception):
    code = "internal_error"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail or self.code


# --- domain / input validation -------------------------------------------

class EmptyWordList(ContextVisError):
    code = "empty_word_list"


class IdenticalWords(ContextVisError):
    code = "identical_words"


class EmptyPrompt(ContextVisError):
    code = "empty_prompt"


class WordNotInSet(ContextVisError):
    code = "word_not_in_set"

    def __init__(self, word: str):
        super().__init__(f"word not in material set: {word}")
        self.word = word


# --- parser ----------------------------------------------------------------

class ParseError(ContextVisError):
    code = "parse_error"


class MalformedRecord(ParseError):
    code = "malformed_record"

    def __init__(self, span: tuple[int, int], detail: str = ""):
        super().__init__(detail or f"malformed record at bytes {span[0]}..{span[1]}")
        self.span = span


class MissingWord(ParseError):
    code = "missing_word"

    def __init__(self, word: str):
        super().__init__(f"no record for requested word: {word}")
        self.word = word


class UnrequestedWord(ParseError):
    code = "unrequested_word"

    def __init__(self, word: str):
        super().__init__(f"record for word not in request: {word}")
        self.word = word


class DuplicateWord(ParseError):
    code = "duplicate_word"

    def __init__(self, word: str):
        super().__init__(f"duplicate record for word: {word}")
        self.word = word


class SentenceWordMismatch(ParseError):
    code = "sentence_word_mismatch"

    def __init__(self, word: str):
        super().__init__(f"sentence contains no surface form of: {word}")
        self.word = word


class EndpointCollision(ParseError):
    code = "endpoint_collision"

    def __init__(self, word: str):
        super().__init__(f"interior word collides with a chain endpoint: {word}")
        self.word = word


# --- providers ---------------------------------------------------------------

class UnrecognizedPromptShape(ContextVisError):
    code = "unrecognized_prompt_shape"


class ProviderError(ContextVisError):
    code = "provider_error"


# --- store -------------------------------------------------------------------

class UnknownId(ContextVisError):
    code = "unknown_id"


class UnknownUnit(UnknownId):
    code = "unknown_unit"


class UnknownMaterialSet(UnknownId):
    code = "unknown_material_set"


class UnknownSticker(UnknownId):
    code = "unknown_sticker"


class UnknownJob(UnknownId):
    code = "unknown_job"


class UnknownExploration(UnknownId):
    code = "unknown_exploration"


class UnknownKey(UnknownId):
    code = "unknown_key"


class SchemaViolation(ContextVisError):
    code = "schema_violation"


class DuplicateId(ContextVisError):
    code = "duplicate_id"


class DanglingReference(ContextVisError):
    code = "dangling_reference"


class NotReady(ContextVisError):
    code = "not_ready"


# --- service -------------------------------------------------------------------

class BadConfig(ContextVisError):
    code = "bad_config"


class AddressInUse(ContextVisError):
    code = "address_in_use"
