#include "igafem/errors.hpp"

#include <iostream>

namespace igafem {

namespace {

std::function<void(const std::string&)>& handler_slot() {
    static std::function<void(const std::string&)> handler;
    return handler;
}

}  // namespace

void warn(const std::string& message) {
    auto& handler = handler_slot();
    if (handler)
        handler(message);
    else
        std::cerr << "warning: " << message << "\n";
}

void set_warning_handler(std::function<void(const std::string&)> handler) {
    handler_slot() = std::move(handler);
}

}  // namespace igafem
