#pragma once

#include <string_view>

#include "patentpipe/prompts.hpp"

namespace patentpipe::detail {

std::string_view builtin_body(TemplateId id);

}  // namespace patentpipe::detail
