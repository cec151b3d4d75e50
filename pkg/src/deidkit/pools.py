"""Public-domain word pools shared by the corpus generator and pseudonymizer.

No real personal data: names are common UK given/family names, streets and
clinics are invented, and email domains use reserved .example hosts.
"""

FORENAMES = (
    "James", "Oliver", "Harry", "George", "Noah", "Jack", "Leo", "Arthur",
    "Thomas", "Oscar", "Henry", "William", "Alfie", "Joshua", "Freddie",
    "Amelia", "Olivia", "Isla", "Emily", "Ava", "Mia", "Sophia", "Grace",
    "Lily", "Freya", "Evie", "Ivy", "Florence", "Poppy", "Charlotte",
    "Daniel", "Samuel", "Joseph", "Edward", "Alexander", "Ethan", "Max",
    "Ruby", "Willow", "Esme", "Daisy", "Phoebe", "Sienna", "Martha",
    "Callum", "Finlay", "Lewis", "Rory", "Angus", "Euan", "Niamh", "Aoife",
    "Saoirse", "Cara", "Eilidh", "Megan", "Ffion", "Rhys", "Gareth", "Dylan",
)

SURNAMES = (
    "Smith", "Jones", "Taylor", "Brown", "Williams", "Wilson", "Johnson",
    "Davies", "Robinson", "Wright", "Thompson", "Evans", "Walker", "White",
    "Roberts", "Green", "Hall", "Wood", "Jackson", "Clarke", "Patel",
    "Khan", "Lewis", "James", "Phillips", "Mason", "Mitchell", "Rose",
    "Davis", "Rodgers", "Parker", "Price", "Bell", "Shaw", "Holmes",
    "Kennedy", "Palmer", "Gordon", "Webb", "Simpson", "Stevens", "Murray",
    "Grant", "Hart", "Dean", "Pearce", "Burton", "Riley", "Armstrong",
    "Gibson", "Fletcher", "Ellis", "Atkinson", "Hayes", "Hudson", "Barker",
    "Byrne", "Lane", "Baxter", "Fox", "Chapman", "Field", "Hunt", "Osei",
    "Begum", "Ahmed", "Singh", "Kaur", "Okafor", "Adeyemi", "Nowak", "Kovacs",
)

STREETS = (
    "Cedar Grove", "Mill Lane", "Orchard Road", "Station Approach",
    "Willow Crescent", "Birch Avenue", "Harbour Street", "Castle Hill",
    "Meadow Walk", "Chapel Row", "Bridge Street", "Holly Close",
    "Garden Terrace", "Victory Road", "Maple Drive", "Elm Court",
    "Sycamore Way", "Abbey Gardens", "Clifton Parade", "Fern Rise",
)

EMAIL_DOMAINS = (
    "nhsmail.example", "clinicmail.example", "careteam.example",
    "referrals.example", "mailbox.example",
)

CLINICS = (
    "Riverside Clinic", "Northgate Surgery", "Harbour View Practice",
    "Fairfield Health Centre", "Longmead Outpatients", "Westbrook Unit",
)

MONTH_NAMES = (
    "January", "February", "March", "April", "May", "June", "July",
    "August", "September", "October", "November", "December",
)
