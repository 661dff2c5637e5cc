#pragma once

#include <cstdint>
#include <cstring>
#include <fcntl.h>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <unistd.h>
#include <vector>

#include "lims/dataset.hpp"

namespace lims {

/// Per-query page-access counter. Every read_page call increments it once;
/// deduplication is the caller's job (visited-page sets).
struct AccessCounter {
    std::uint64_t pages_read = 0;

    void reset() { pages_read = 0; }
};

/// Fixed-size block device. Implementations must support concurrent reads.
class PageDevice {
public:
    virtual ~PageDevice() = default;
    virtual std::uint32_t page_size() const = 0;
    virtual std::uint64_t page_count() const = 0;
    virtual void read(std::uint64_t page, std::span<std::byte> out) const = 0;
    virtual void write(std::uint64_t page, std::span<const std::byte> in) = 0;
    /// Appends a zeroed page and returns its id.
    virtual std::uint64_t append_page() = 0;
    virtual bool writable() const = 0;
};

class MemoryPageDevice final : public PageDevice {
public:
    explicit MemoryPageDevice(std::uint32_t page_size) : page_size_(page_size) {}

    std::uint32_t page_size() const override { return page_size_; }
    std::uint64_t page_count() const override { return blob_.size() / page_size_; }

    void read(std::uint64_t page, std::span<std::byte> out) const override {
        bounds_check(page);
        std::memcpy(out.data(), blob_.data() + page * page_size_, page_size_);
    }

    void write(std::uint64_t page, std::span<const std::byte> in) override {
        bounds_check(page);
        std::memcpy(blob_.data() + page * page_size_, in.data(), page_size_);
    }

    std::uint64_t append_page() override {
        blob_.resize(blob_.size() + page_size_);
        return page_count() - 1;
    }

    bool writable() const override { return true; }

    std::span<const std::byte> bytes() const { return blob_; }

    void assign(std::span<const std::byte> bytes) {
        if (bytes.size() % page_size_ != 0)
            throw std::invalid_argument("MemoryPageDevice::assign: not page aligned");
        blob_.assign(bytes.begin(), bytes.end());
    }

private:
    void bounds_check(std::uint64_t page) const {
        if (page >= page_count())
            throw std::out_of_range("page id out of range");
    }

    std::uint32_t page_size_;
    std::vector<std::byte> blob_;
};

/// Read-only device over a page region inside an index file. Uses pread, so
/// concurrent queries can share one descriptor.
class FilePageDevice final : public PageDevice {
public:
    FilePageDevice(const std::filesystem::path& path, std::uint64_t byte_offset,
                   std::uint64_t pages, std::uint32_t page_size)
        : offset_(byte_offset), pages_(pages), page_size_(page_size) {
        fd_ = ::open(path.c_str(), O_RDONLY);
        if (fd_ < 0)
            throw std::runtime_error("FilePageDevice: cannot open " + path.string());
    }

    ~FilePageDevice() override {
        if (fd_ >= 0)
            ::close(fd_);
    }

    FilePageDevice(const FilePageDevice&) = delete;
    FilePageDevice& operator=(const FilePageDevice&) = delete;

    std::uint32_t page_size() const override { return page_size_; }
    std::uint64_t page_count() const override { return pages_; }

    void read(std::uint64_t page, std::span<std::byte> out) const override {
        if (page >= pages_)
            throw std::out_of_range("page id out of range");
        const auto want = static_cast<ssize_t>(page_size_);
        const auto got = ::pread(fd_, out.data(), page_size_,
                                 static_cast<off_t>(offset_ + page * page_size_));
        if (got != want)
            throw std::runtime_error("FilePageDevice: short read");
    }

    void write(std::uint64_t, std::span<const std::byte>) override {
        throw std::logic_error("FilePageDevice is read-only");
    }

    std::uint64_t append_page() override {
        throw std::logic_error("FilePageDevice is read-only");
    }

    bool writable() const override { return false; }

private:
    int fd_ = -1;
    std::uint64_t offset_;
    std::uint64_t pages_;
    std::uint32_t page_size_;
};

// Page layout: {record_count: u32, flags: u32} header, then packed records.
inline constexpr std::size_t kPageHeaderBytes = 8;

/// Records a page can hold.
inline std::uint32_t records_per_page(Metric metric, std::uint32_t dim, std::uint32_t page_size) {
    const std::size_t rec = record_size(metric, dim);
    if (page_size <= kPageHeaderBytes + rec)
        throw std::invalid_argument("records_per_page: page too small for one record");
    return static_cast<std::uint32_t>((page_size - kPageHeaderBytes) / rec);
}

/// Record store over a page device: serialization, region writes, counted
/// reads. Not itself synchronized; reads are safe concurrently, writes are
/// build/maintenance-exclusive.
class PagedStore {
public:
    PagedStore(std::shared_ptr<PageDevice> device, Metric metric, std::uint32_t dim)
        : device_(std::move(device)), metric_(metric), dim_(dim),
          omega_(records_per_page(metric, dim, device_->page_size())) {}

    std::uint32_t omega() const { return omega_; }
    std::uint32_t page_size() const { return device_->page_size(); }
    std::uint64_t page_count() const { return device_->page_count(); }
    const PageDevice& device() const { return *device_; }
    PageDevice& device() { return *device_; }

    /// Reads and deserializes one page, incrementing the access counter.
    std::vector<Record> read_page(std::uint64_t page, AccessCounter& counter) const {
        counter.pages_read += 1;
        return read_page_uncounted(page);
    }

    /// Bookkeeping read for build/maintenance paths; never appears in query
    /// stats.
    std::vector<Record> read_page_uncounted(std::uint64_t page) const {
        std::vector<std::byte> buf(device_->page_size());
        device_->read(page, buf);
        std::size_t off = 0;
        const std::uint32_t count = get_u32(buf, off);
        get_u32(buf, off); // flags, reserved
        if (count > omega_)
            throw std::runtime_error("read_page: corrupt page header");
        std::vector<Record> recs;
        recs.reserve(count);
        const std::size_t rec_bytes = record_size(metric_, dim_);
        for (std::uint32_t i = 0; i < count; ++i) {
            recs.push_back(deserialize_record(
                std::span<const std::byte>(buf).subspan(off, rec_bytes), metric_, dim_));
            off += rec_bytes;
        }
        return recs;
    }

    /// Writes records (already in key order) as a run of contiguous pages,
    /// each fully utilized except possibly the last. Returns
    /// {first page, page count}.
    std::pair<std::uint64_t, std::uint64_t> write_region(std::span<const Record> records) {
        if (records.empty())
            return {device_->page_count(), 0};
        const std::uint64_t first = device_->page_count();
        std::uint64_t pages = 0;
        for (std::size_t begin = 0; begin < records.size(); begin += omega_) {
            const std::size_t count = std::min<std::size_t>(omega_, records.size() - begin);
            const std::uint64_t page = device_->append_page();
            write_page(page, records.subspan(begin, count));
            ++pages;
        }
        return {first, pages};
    }

    void write_page(std::uint64_t page, std::span<const Record> records) {
        if (records.size() > omega_)
            throw std::invalid_argument("write_page: too many records");
        std::vector<std::byte> buf;
        buf.reserve(device_->page_size());
        put_u32(buf, static_cast<std::uint32_t>(records.size()));
        put_u32(buf, 0);
        for (const auto& rec : records)
            serialize_record(rec, metric_, dim_, buf);
        buf.resize(device_->page_size());
        device_->write(page, buf);
    }

    /// Appends one record to the tail page of an insert buffer, allocating a
    /// fresh page when the tail is full. Returns the page written.
    std::uint64_t append_record(std::vector<std::uint64_t>& buffer_pages, const Record& rec) {
        if (!buffer_pages.empty()) {
            const std::uint64_t tail = buffer_pages.back();
            auto recs = read_page_uncounted(tail);
            if (recs.size() < omega_) {
                recs.push_back(rec);
                write_page(tail, recs);
                return tail;
            }
        }
        const std::uint64_t page = device_->append_page();
        write_page(page, std::span<const Record>(&rec, 1));
        buffer_pages.push_back(page);
        return page;
    }

private:
    std::shared_ptr<PageDevice> device_;
    Metric metric_;
    std::uint32_t dim_;
    std::uint32_t omega_;
};

} // namespace lims
