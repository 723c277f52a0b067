#pragma once

namespace pcaqs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pcaqs
