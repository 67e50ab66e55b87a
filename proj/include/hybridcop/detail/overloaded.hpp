#pragma once

namespace hybridcop::detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace hybridcop::detail
