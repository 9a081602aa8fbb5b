#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace patentpipe {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDraft : public Error {
public:
    using Error::Error;
};

class InvalidPlan : public Error {
public:
    using Error::Error;
};

class EmptySection : public Error {
public:
    explicit EmptySection(std::string section)
        : Error("empty section: " + section), section_(std::move(section)) {}
    const std::string& section() const noexcept { return section_; }

private:
    std::string section_;
};

class IncompleteReference : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---- gateway ----

class InvalidRequest : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    TransportError(const std::string& what, int attempts)
        : Error(what), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class BadStatus : public Error {
public:
    BadStatus(int code, const std::string& body)
        : Error("backend returned status " + std::to_string(code) + (body.empty() ? "" : ": " + body)),
          code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

// ---- prompt-kit ----

class MissingSlot : public Error {
public:
    explicit MissingSlot(std::string slot)
        : Error("unbound template slot: " + slot), slot_(std::move(slot)) {}
    const std::string& slot() const noexcept { return slot_; }

private:
    std::string slot_;
};

class PromptAssetError : public Error {
public:
    using Error::Error;
};

// Any failure to read the tag protocol out of a model response.
class ParseError : public Error {
public:
    using Error::Error;
};

class TagMissing : public ParseError {
public:
    explicit TagMissing(const std::string& tag) : ParseError("tag <" + tag + "> not found") {}
};

class TagDuplicated : public ParseError {
public:
    TagDuplicated(const std::string& tag, std::size_t count)
        : ParseError("tag <" + tag + "> appears " + std::to_string(count) + " times, expected one") {}
};

class TagUnclosed : public ParseError {
public:
    explicit TagUnclosed(const std::string& tag) : ParseError("tag <" + tag + "> is not closed") {}
};

class TagNested : public ParseError {
public:
    explicit TagNested(const std::string& tag) : ParseError("tag <" + tag + "> is nested in itself") {}
};

class NoSections : public ParseError {
public:
    explicit NoSections(const std::string& prefix = "Section")
        : ParseError("no <" + prefix + "-k> blocks found") {}
};

class NonContiguousIndices : public ParseError {
public:
    explicit NonContiguousIndices(std::vector<int> found);
    const std::vector<int>& found() const noexcept { return found_; }

private:
    std::vector<int> found_;
};

// ---- agents ----

class EmptyGeneration : public ParseError {
public:
    explicit EmptyGeneration(const std::string& role) : ParseError("empty generation from " + role) {}
};

class MalformedVerdict : public ParseError {
public:
    using ParseError::ParseError;
};

// ---- metrics ----

class IrrUndefined : public Error {
public:
    explicit IrrUndefined(std::size_t n)
        : Error("IRR needs at least two sentences, got " + std::to_string(n)) {}
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t candidates, std::size_t references)
        : Error("candidate/reference count mismatch: " + std::to_string(candidates) + " vs " +
                std::to_string(references)) {}
};

// ---- datakit / cli ----

class InsufficientRecords : public Error {
public:
    using Error::Error;
};

class MissingTarget : public Error {
public:
    MissingTarget(std::string record_id, std::string kind)
        : Error("record " + record_id + " has no target for " + kind),
          record_id_(std::move(record_id)), kind_(std::move(kind)) {}
    const std::string& record_id() const noexcept { return record_id_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string record_id_;
    std::string kind_;
};

class AlignmentError : public Error {
public:
    AlignmentError(std::vector<std::string> missing_in_reference, std::vector<std::string> missing_in_generated);
    const std::vector<std::string>& missing_in_reference() const noexcept { return missing_ref_; }
    const std::vector<std::string>& missing_in_generated() const noexcept { return missing_gen_; }

private:
    std::vector<std::string> missing_ref_;
    std::vector<std::string> missing_gen_;
};

}  // namespace patentpipe
