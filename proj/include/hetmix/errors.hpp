#ifndef HETMIX_ERRORS_HPP
#define HETMIX_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetmix {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset, schema or model content does not satisfy its contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A weighted estimate was requested with no weight to estimate from.
class EstimationError : public Error {
public:
    using Error::Error;
};

// A mixture component lost (almost) all of its responsibility mass during EM.
class ComponentCollapse : public Error {
public:
    ComponentCollapse(std::size_t component, double mass)
        : Error("component " + std::to_string(component) + " collapsed (responsibility mass " +
                std::to_string(mass) + ")"),
          component_(component) {}
    std::size_t component() const { return component_; }

private:
    std::size_t component_;
};

// Every restart of a fit failed.
class TrainingFailure : public Error {
public:
    using Error::Error;
};

// Observation has zero likelihood under every component.
class ImpossibleObservation : public Error {
public:
    using Error::Error;
};

class InferenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hetmix

#endif  // HETMIX_ERRORS_HPP
