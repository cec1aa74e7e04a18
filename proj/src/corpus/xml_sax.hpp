#pragma once

// Thin RAII wrapper over expat: element/text callbacks plus error reporting
// with byte offsets.

#include <expat.h>

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attackmap/error.hpp"

namespace attackmap::corpus::detail {

using Attributes = std::vector<std::pair<std::string_view, std::string_view>>;

inline std::string_view find_attribute(const Attributes& attrs, std::string_view name) {
    for (const auto& [key, value] : attrs) {
        if (key == name) return value;
    }
    return {};
}

/// Strips an optional namespace prefix ("xhtml:p" -> "p").
inline std::string_view local_name(std::string_view name) {
    const auto colon = name.rfind(':');
    return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

struct SaxHandler {
    std::function<void(std::string_view name, const Attributes& attrs)> on_start;
    std::function<void(std::string_view name)> on_end;
    std::function<void(std::string_view text)> on_text;
};

class SaxParser {
public:
    explicit SaxParser(SaxHandler handler) : handler_(std::move(handler)), parser_(XML_ParserCreate("UTF-8")) {
        XML_SetUserData(parser_, this);
        XML_SetElementHandler(parser_, &SaxParser::start_thunk, &SaxParser::end_thunk);
        XML_SetCharacterDataHandler(parser_, &SaxParser::text_thunk);
    }
    ~SaxParser() { XML_ParserFree(parser_); }
    SaxParser(const SaxParser&) = delete;
    SaxParser& operator=(const SaxParser&) = delete;

    /// Parses the whole document. Exceptions thrown from callbacks stop the
    /// parse and are rethrown here.
    void parse(std::string_view document, std::string_view source) {
        const auto status = XML_Parse(parser_, document.data(), static_cast<int>(document.size()), XML_TRUE);
        if (pending_) std::rethrow_exception(pending_);
        if (status != XML_STATUS_OK) {
            const auto offset = XML_GetCurrentByteIndex(parser_);
            throw ParseError(std::string(source), offset < 0 ? 0 : static_cast<std::size_t>(offset),
                             XML_ErrorString(XML_GetErrorCode(parser_)));
        }
    }

    std::size_t byte_offset() const {
        const auto offset = XML_GetCurrentByteIndex(parser_);
        return offset < 0 ? 0 : static_cast<std::size_t>(offset);
    }

private:
    template <typename Fn>
    void guarded(Fn&& fn) {
        if (pending_) return;
        try {
            fn();
        } catch (...) {
            pending_ = std::current_exception();
            XML_StopParser(parser_, XML_FALSE);
        }
    }

    static void start_thunk(void* self_ptr, const XML_Char* name, const XML_Char** attrs) {
        auto* self = static_cast<SaxParser*>(self_ptr);
        self->guarded([&] {
            self->attrs_.clear();
            for (int i = 0; attrs[i] != nullptr; i += 2) self->attrs_.emplace_back(attrs[i], attrs[i + 1]);
            if (self->handler_.on_start) self->handler_.on_start(name, self->attrs_);
        });
    }
    static void end_thunk(void* self_ptr, const XML_Char* name) {
        auto* self = static_cast<SaxParser*>(self_ptr);
        self->guarded([&] {
            if (self->handler_.on_end) self->handler_.on_end(name);
        });
    }
    static void text_thunk(void* self_ptr, const XML_Char* text, int length) {
        auto* self = static_cast<SaxParser*>(self_ptr);
        self->guarded([&] {
            if (self->handler_.on_text) self->handler_.on_text(std::string_view(text, static_cast<std::size_t>(length)));
        });
    }

    SaxHandler handler_;
    XML_Parser parser_;
    Attributes attrs_;
    std::exception_ptr pending_;
};

/// Collapses runs of whitespace to one space and trims both ends.
inline std::string normalize_space(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (const char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

/// Leading integer of a "MAJOR.MINOR" version attribute, or -1.
inline int major_version(std::string_view version) {
    int major = 0;
    std::size_t i = 0;
    for (; i < version.size() && version[i] >= '0' && version[i] <= '9'; ++i) major = major * 10 + (version[i] - '0');
    return i == 0 ? -1 : major;
}

inline int parse_positive_int(std::string_view text) {
    if (text.empty() || text.size() > 9) return 0;
    int value = 0;
    for (const char c : text) {
        if (c < '0' || c > '9') return 0;
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace attackmap::corpus::detail
