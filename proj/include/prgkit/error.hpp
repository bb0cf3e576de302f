#pragma once

#include <stdexcept>
#include <string>

namespace prgkit {

enum class Errc {
    // binfmt
    TooShort,
    MisalignedPointer,
    NoPrologueAt0x50,
    UnterminatedSubroutine,
    EntryMismatch,
    OverlapDetected,
    // armdec
    Unencodable,
    // emulator
    IncompleteTable,
    RunFault,
    // knowledge
    EmptyBody,
    CollisionDetected,
    AmbiguousMatch,
    InsufficientPlaintext,
    MalformedMap,
    BadCorpus,
    // analysis
    NoLayout,
    HaltNotReached,
    // patch
    OldMismatch,
    Overlap,
    OutOfBounds,
    ValueNotPatchable,
    // forge
    SpecInfeasible,
    // cli / io
    Io,
    BadInput,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace prgkit
