#pragma once

#include <stdexcept>
#include <string>

namespace crossway {

struct UnknownLanelet : std::runtime_error {
    explicit UnknownLanelet(int id)
        : std::runtime_error("unknown lanelet id " + std::to_string(id)) {}
};

struct NoRouteFound : std::runtime_error {
    NoRouteFound(int start, int goal)
        : std::runtime_error("no route from lanelet " + std::to_string(start) +
                             " to " + std::to_string(goal)) {}
};

struct OffRoad : std::runtime_error {
    OffRoad(double x, double y)
        : std::runtime_error("point (" + std::to_string(x) + ", " +
                             std::to_string(y) + ") lies in no lanelet") {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidRoute : std::runtime_error {
    explicit InvalidRoute(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct EpisodeFinished : std::logic_error {
    EpisodeFinished() : std::logic_error("step() called on a finished episode") {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IncompatibleCheckpoint : std::runtime_error {
    explicit IncompatibleCheckpoint(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace crossway
