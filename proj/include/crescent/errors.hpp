#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crescent {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class MissingFile : public Error
{
public:
    explicit MissingFile(std::string path)
        : Error("missing file: " + path), path_(std::move(path))
    {
    }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class ParseError : public Error
{
public:
    ParseError(std::string source, std::size_t row, std::string column,
               const std::string& what)
        : Error(source + ": row " + std::to_string(row) + ", column '" +
                column + "': " + what),
          source_(std::move(source)), row_(row), column_(std::move(column))
    {
    }
    const std::string& source() const noexcept { return source_; }
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::string source_;
    std::size_t row_;
    std::string column_;
};

class DanglingReference : public Error
{
public:
    explicit DanglingReference(std::string id)
        : Error("dangling reference: " + id), id_(std::move(id))
    {
    }
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class InvariantViolation : public Error
{
public:
    using Error::Error;
};

class InfeasibleTarget : public Error
{
public:
    using Error::Error;
};

class DegenerateTrack : public Error
{
public:
    using Error::Error;
};

class OutOfRange : public Error
{
public:
    using Error::Error;
};

class MissingCurve : public Error
{
public:
    explicit MissingCurve(std::string component_class)
        : Error("missing fragility curve for class " + component_class),
          class_(std::move(component_class))
    {
    }
    const std::string& component_class() const noexcept { return class_; }

private:
    std::string class_;
};

class UnknownComponent : public Error
{
public:
    explicit UnknownComponent(const std::string& key)
        : Error("unknown component: " + key)
    {
    }
};

class SingularSystem : public Error
{
public:
    using Error::Error;
};

class MisalignedTimeGrid : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace crescent
