"""The Olympic example as executable ground truth.

A warehouse of Olympic events and attendees: the conceptual model has
four dimensions (Location, Date, Event, Attendee) around one Attends
fact relationship carrying a decimal TicketPrice at (Venue, Day, Event,
Attendee) grain.  The Date hierarchy exercises the interesting
machinery: Day splits exclusively into Weekday/Weekend (conditions S1
and S2 on the Day table), those split exclusively again into Week or
Month (one denormalized WeekMonth period table), and Year spans two
tables (its key lives on WeekMonth, its label on Year).

Day data covers 2008, a leap year, so there are 366 day rows.
"""

from __future__ import annotations

import csv
import datetime
import decimal
import io
import random
from pathlib import Path

from .model import (
    Cardinality,
    CdlModel,
    Column,
    Condition,
    ConditionOperator,
    Datatype,
    Dimension,
    FactRelationship,
    ForeignKey,
    FragmentKind,
    Hierarchy,
    Level,
    MappingFragment,
    MdlModel,
    ParentChildRel,
    Property,
    PropertyMapping,
    Role,
    SdlModel,
    Table,
    scalar_to_text,
)

WHISTLER = "Whistler Olympic Park"

_WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri")
_WEEKEND = ("Sat", "Sun")


def _card(text: str) -> Cardinality:
    return Cardinality.parse(text)


def olympic_cdl() -> CdlModel:
    integer, string, date = Datatype.INTEGER, Datatype.STRING, Datatype.DATE
    levels = (
        Level("Venue", (Property("VenueID", integer), Property("Name", string), Property("Capacity", integer)), ("VenueID",)),
        Level("City", (Property("CityID", integer), Property("Name", string)), ("CityID",)),
        Level("Country", (Property("CountryID", integer), Property("Name", string)), ("CountryID",)),
        Level("Day", (Property("DayID", integer), Property("FullDate", date), Property("DayOfWeek", string)), ("DayID",)),
        Level("Weekday", (Property("DayID", integer), Property("FullDate", date), Property("Description", string)), ("DayID",)),
        Level("Weekend", (Property("DayID", integer), Property("FullDate", date), Property("DayOfWeek", string)), ("DayID",)),
        Level("Week", (Property("WeekID", integer), Property("Label", string), Property("Description", string)), ("WeekID",)),
        Level("Month", (Property("MonthID", integer), Property("Label", string)), ("MonthID",)),
        Level("Year", (Property("YearID", integer), Property("YearLabel", string)), ("YearID",)),
        Level("Event", (Property("EventID", integer), Property("Name", string), Property("Sport", string)), ("EventID",)),
        Level("Attendee", (Property("AttendeeID", integer), Property("Name", string)), ("AttendeeID",)),
    )
    dimensions = (
        Dimension("Location", "Venue", ("Location",)),
        Dimension("Date", "Day", ("Date",)),
        Dimension("Event", "Event"),
        Dimension("Attendee", "Attendee"),
    )
    hierarchies = (
        Hierarchy(
            "Location",
            (
                ParentChildRel("Venue", "City", _card("(1,n)"), _card("(1,1)")),
                ParentChildRel("City", "Country", _card("(1,n)"), _card("(1,1)")),
            ),
        ),
        Hierarchy(
            "Date",
            (
                ParentChildRel("Day", "Weekday", _card("(1,1)"), _card("(0,1)"), exclusive_group="DayKind"),
                ParentChildRel("Day", "Weekend", _card("(1,1)"), _card("(0,1)"), exclusive_group="DayKind"),
                ParentChildRel("Weekday", "Week", _card("(0,n)"), _card("(0,1)"), exclusive_group="PeriodKind"),
                ParentChildRel("Weekend", "Week", _card("(0,n)"), _card("(0,1)"), exclusive_group="PeriodKind"),
                ParentChildRel("Weekday", "Month", _card("(0,n)"), _card("(0,1)"), exclusive_group="PeriodKind"),
                ParentChildRel("Weekend", "Month", _card("(0,n)"), _card("(0,1)"), exclusive_group="PeriodKind"),
                ParentChildRel("Week", "Year", _card("(1,n)"), _card("(1,1)")),
                ParentChildRel("Month", "Year", _card("(1,n)"), _card("(1,1)")),
            ),
        ),
    )
    facts = (
        FactRelationship(
            "Attends",
            roles=(
                Role("location", "Location"),
                Role("date", "Date"),
                Role("event", "Event"),
                Role("attendee", "Attendee"),
            ),
            measures=(Property("TicketPrice", Datatype.DECIMAL),),
        ),
    )
    return CdlModel("Olympic", levels, dimensions, hierarchies, facts)


def olympic_sdl() -> SdlModel:
    integer, string, date, dec = Datatype.INTEGER, Datatype.STRING, Datatype.DATE, Datatype.DECIMAL
    dimension_tables = (
        Table(
            "Country",
            (Column("CountryID", integer), Column("CountryName", string)),
            ("CountryID",),
        ),
        Table(
            "City",
            (Column("CityID", integer), Column("CityName", string), Column("CountryID", integer)),
            ("CityID",),
            (ForeignKey(("CountryID",), "Country", ("CountryID",)),),
        ),
        Table(
            "Venue",
            (
                Column("VenueID", integer),
                Column("VenueName", string),
                Column("Capacity", integer),
                Column("CityID", integer),
            ),
            ("VenueID",),
            (ForeignKey(("CityID",), "City", ("CityID",)),),
        ),
        Table(
            "Year",
            (Column("YearID", integer), Column("YearLabel", string)),
            ("YearID",),
        ),
        Table(
            "WeekMonth",
            (
                Column("WeekMonthID", integer),
                Column("PeriodType", string),
                Column("PeriodLabel", string),
                Column("YearID", integer),
            ),
            ("WeekMonthID",),
            (ForeignKey(("YearID",), "Year", ("YearID",)),),
        ),
        Table(
            "Day",
            (
                Column("DayID", integer),
                Column("FullDate", date),
                Column("DayOfWeek", string),
                Column("WeekMonthID", integer),
            ),
            ("DayID",),
            (ForeignKey(("WeekMonthID",), "WeekMonth", ("WeekMonthID",)),),
        ),
        Table(
            "Event",
            (Column("EventID", integer), Column("EventName", string), Column("Sport", string)),
            ("EventID",),
        ),
        Table(
            "Attendee",
            (Column("AttendeeID", integer), Column("AttendeeName", string)),
            ("AttendeeID",),
        ),
    )
    fact_tables = (
        Table(
            "Attends",
            (
                Column("VenueID", integer),
                Column("DayID", integer),
                Column("EventID", integer),
                Column("AttendeeID", integer),
                Column("TicketPrice", dec),
            ),
            ("VenueID", "DayID", "EventID", "AttendeeID"),
            (
                ForeignKey(("VenueID",), "Venue", ("VenueID",)),
                ForeignKey(("DayID",), "Day", ("DayID",)),
                ForeignKey(("EventID",), "Event", ("EventID",)),
                ForeignKey(("AttendeeID",), "Attendee", ("AttendeeID",)),
            ),
        ),
    )
    return SdlModel("OlympicDW", fact_tables=fact_tables, dimension_tables=dimension_tables)


def olympic_mdl() -> MdlModel:
    lm, fm = FragmentKind.LEVEL, FragmentKind.FACT_RELATIONSHIP
    pm = PropertyMapping
    fragments = (
        MappingFragment(lm, "Venue", "Venue", (pm("VenueID", "VenueID"), pm("Name", "VenueName"), pm("Capacity", "Capacity")), name="S-Venue"),
        MappingFragment(lm, "City", "City", (pm("CityID", "CityID"), pm("Name", "CityName")), name="S-City"),
        MappingFragment(lm, "Country", "Country", (pm("CountryID", "CountryID"), pm("Name", "CountryName")), name="S-Country"),
        MappingFragment(lm, "Day", "Day", (pm("DayID", "DayID"), pm("FullDate", "FullDate"), pm("DayOfWeek", "DayOfWeek")), name="S-Day"),
        MappingFragment(
            lm,
            "Weekday",
            "Day",
            (pm("DayID", "DayID"), pm("FullDate", "FullDate")),
            (Condition("DayOfWeek", ConditionOperator.IN, _WEEKDAYS),),
            name="S1",
        ),
        MappingFragment(
            lm,
            "Weekend",
            "Day",
            (pm("DayID", "DayID"), pm("FullDate", "FullDate"), pm("DayOfWeek", "DayOfWeek")),
            (Condition("DayOfWeek", ConditionOperator.IN, _WEEKEND),),
            name="S2",
        ),
        MappingFragment(
            lm,
            "Week",
            "WeekMonth",
            (pm("WeekID", "WeekMonthID"), pm("Label", "PeriodLabel")),
            (Condition("PeriodType", ConditionOperator.EQUALS, ("Week",)),),
            name="S-Week",
        ),
        MappingFragment(
            lm,
            "Month",
            "WeekMonth",
            (pm("MonthID", "WeekMonthID"), pm("Label", "PeriodLabel")),
            (Condition("PeriodType", ConditionOperator.EQUALS, ("Month",)),),
            name="S-Month",
        ),
        MappingFragment(lm, "Year", "WeekMonth", (pm("YearID", "YearID"),), name="S-YearKey"),
        MappingFragment(lm, "Year", "Year", (pm("YearLabel", "YearLabel"),), name="S-YearLabel"),
        MappingFragment(lm, "Event", "Event", (pm("EventID", "EventID"), pm("Name", "EventName"), pm("Sport", "Sport")), name="S-Event"),
        MappingFragment(lm, "Attendee", "Attendee", (pm("AttendeeID", "AttendeeID"), pm("Name", "AttendeeName")), name="S-Attendee"),
        MappingFragment(fm, "Attends", "Attends", (pm("TicketPrice", "TicketPrice"),), name="S-Attends"),
    )
    return MdlModel(fragments)


# ---------------------------------------------------------------------------
# Data generation


_VENUES = (
    (1, WHISTLER, 12000, 2),
    (2, "Canada Hockey Place", 18630, 1),
    (3, "Pacific Coliseum", 14239, 1),
    (4, "Richmond Olympic Oval", 8000, 3),
    (5, "Cypress Mountain", 10000, 1),
    (6, "Key Arena", 17000, 4),
)
_CITIES = ((1, "Vancouver", 1), (2, "Whistler", 1), (3, "Richmond", 1), (4, "Seattle", 2))
_COUNTRIES = ((1, "Canada"), (2, "United States"))
_SPORTS = ("Ice Hockey", "Alpine Skiing", "Speed Skating", "Curling", "Biathlon")

YEAR = 2008
WEEK_BASE = 100
MONTH_BASE = 200


def olympic_tables(seed: int = 7, scale: int = 500) -> dict[str, list[tuple]]:
    """All table rows for one deterministic instance with `scale` facts.

    Every day points at exactly one period row: odd day ids at their
    week, even ones at their month, which realizes the exclusive
    Week/Month split in the data.
    """
    rng = random.Random(seed)
    tables: dict[str, list[tuple]] = {}
    tables["Country"] = [list(row) for row in _COUNTRIES]
    tables["City"] = [list(row) for row in _CITIES]
    tables["Venue"] = [list(row) for row in _VENUES]
    tables["Year"] = [(YEAR, str(YEAR))]

    weeks = [(WEEK_BASE + i, "Week", f"{YEAR}-W{i:02d}", YEAR) for i in range(1, 54)]
    months = [(MONTH_BASE + m, "Month", f"{YEAR}-M{m:02d}", YEAR) for m in range(1, 13)]
    tables["WeekMonth"] = weeks + months

    days = []
    start = datetime.date(YEAR, 1, 1)
    for i in range(366):
        day = start + datetime.timedelta(days=i)
        day_id = i + 1
        week_no = i // 7 + 1
        period = WEEK_BASE + week_no if day_id % 2 == 1 else MONTH_BASE + day.month
        days.append((day_id, day, day.strftime("%a"), period))
    tables["Day"] = days

    tables["Event"] = [(i, f"Event {i:02d}", _SPORTS[(i - 1) % len(_SPORTS)]) for i in range(1, 21)]
    tables["Attendee"] = [(i, f"Attendee {i:02d}") for i in range(1, 51)]

    facts = []
    seen = set()
    while len(facts) < scale:
        key = (
            rng.randint(1, len(_VENUES)),
            rng.randint(1, 366),
            rng.randint(1, 20),
            rng.randint(1, 50),
        )
        if key in seen:
            continue
        seen.add(key)
        price = decimal.Decimal(rng.randrange(2000, 50001)) / decimal.Decimal(100)
        facts.append(key + (price,))
    tables["Attends"] = facts
    return {name: [tuple(row) for row in rows] for name, rows in tables.items()}


def table_csv(table: Table, rows: list[tuple]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow([c.name for c in table.columns])
    for row in rows:
        writer.writerow([scalar_to_text(v) for v in row])
    return buffer.getvalue().encode("utf-8")


def generate_olympic_data(seed: int, scale: int, out_dir: Path) -> dict[str, Path]:
    """Write one CSV per table into `out_dir`; deterministic per seed."""
    sdl = olympic_sdl()
    rows = olympic_tables(seed=seed, scale=scale)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for table in sdl.tables:
        path = out_dir / f"{table.name}.csv"
        path.write_bytes(table_csv(table, rows[table.name]))
        paths[table.name] = path
    return paths


WEEKEND_SALES_QUERY = (
    f'AGGREGATE sum(TicketPrice) FROM Attends ROLLUP Date TO Weekend WHERE Venue.Name = "{WHISTLER}"'
)
